"""Explained-variance curves of the layered latent space, per layer depth."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateData
from ..generator import Generator, GeneratorParams
from ..numerics import fit_pca


@dataclass(frozen=True)
class VarianceRow:
    layers: int
    component: int
    ratio: float
    cumulative: float


def variance_report(
    params: GeneratorParams,
    layer_options=(3, 6, 12),
    n_samples: int = 1000,
) -> list[VarianceRow]:
    """Full-rank PCA over the first M flattened layers for each M.

    Emits one row per (layer depth, component index) carrying that
    component's variance ratio and the running cumulative total.
    """
    if n_samples < 2:
        raise DegenerateData("need at least 2 samples")
    generator = Generator(params)
    rows: list[VarianceRow] = []
    for m in layer_options:
        flat = np.stack(
            [generator.sample_latent(i).layers[:m].ravel() for i in range(n_samples)]
        )
        basis = fit_pca(flat, min(flat.shape[1], n_samples))
        cumulative = np.cumsum(basis.explained_variance_ratio)
        for idx, (ratio, cum) in enumerate(
            zip(basis.explained_variance_ratio, cumulative)
        ):
            rows.append(VarianceRow(m, idx, float(ratio), float(cum)))
    return rows


def write_variance_csv(rows: list[VarianceRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layers", "component", "ratio", "cumulative"])
        for row in rows:
            writer.writerow(
                [row.layers, row.component, f"{row.ratio:.12g}", f"{row.cumulative:.12g}"]
            )
