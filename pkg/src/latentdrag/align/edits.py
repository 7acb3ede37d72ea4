"""Principal-direction edits and cross-generator transfer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BadShape
from ..generator import Generator, LayeredLatent
from ..numerics import PcaBasis
from .projection import ProjectionConfig, project_image


@dataclass(frozen=True)
class EditSpec:
    component_index: int
    magnitude: float
    layer_range: tuple[int, int]  # [start, end)


def edit_along_component(
    latent: LayeredLatent, basis: PcaBasis, edit: EditSpec
) -> LayeredLatent:
    """Move the latent along one basis component inside ``layer_range``."""
    start, end = edit.layer_range
    n_layers, dim = latent.layers.shape
    if not 0 <= start < end <= n_layers:
        raise BadShape(f"layer_range {edit.layer_range} outside [0, {n_layers})")
    if not 0 <= edit.component_index < basis.n_components:
        raise BadShape(
            f"component {edit.component_index} outside basis of "
            f"{basis.n_components} components"
        )
    span = (end - start) * dim
    if basis.dim != span:
        raise BadShape(
            f"basis dimension {basis.dim} does not match layer_range span {span}"
        )
    out = latent.layers.copy()
    direction = basis.components[edit.component_index].reshape(end - start, dim)
    out[start:end] += edit.magnitude * direction
    return LayeredLatent(out)


def transfer_edit(
    gen_a: Generator,
    gen_b: Generator,
    latent_a: LayeredLatent,
    basis_a: PcaBasis,
    edit: EditSpec,
    proj_config: ProjectionConfig | None = None,
) -> dict:
    """Edit in generator A, then reproduce the edited image in generator B.

    Returns the original and edited renders of A, B's projection of the
    edited render, both result latents, and the projection loss trace.
    """
    image_a = gen_a.render(latent_a)
    latent_a_edited = edit_along_component(latent_a, basis_a, edit)
    image_a_edited = gen_a.render(latent_a_edited)
    latent_b, trace = project_image(image_a_edited, gen_b, proj_config)
    return {
        "image_a": image_a,
        "image_a_edited": image_a_edited,
        "latent_a_edited": latent_a_edited,
        "image_b_projected": gen_b.render(latent_b),
        "latent_b": latent_b,
        "loss_trace": trace,
    }


def side_by_side(images: list[np.ndarray], gap: int = 4) -> np.ndarray:
    """Horizontal comparison panel with a light separator between rasters."""
    if not images:
        raise BadShape("need at least one image for a panel")
    c, h, _ = images[0].shape
    for img in images:
        if img.shape[0] != c or img.shape[1] != h:
            raise BadShape("panel images must share channel count and height")
    spacer = np.full((c, h, gap), 0.9)
    parts: list[np.ndarray] = []
    for i, img in enumerate(images):
        if i:
            parts.append(spacer)
        parts.append(img)
    return np.concatenate(parts, axis=2)
