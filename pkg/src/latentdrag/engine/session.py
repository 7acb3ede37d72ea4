"""Drag session state: trainable parameterization plus tracking caches."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from ..errors import BadConfig, OutOfBounds
from ..generator import Generator, GeneratorParams, LayeredLatent, sample_feature
from ..numerics import AdamWHyper, OptimizerState, PcaBasis, fit_pca, pca_project, pca_reconstruct
from .config import DragConfig, HandlePair


@dataclass
class StepRecord:
    iteration: int
    motion_loss: float
    grad_magnitude: float
    t_opt: float
    t_track: float
    mean_distance: float
    max_distance: float


@dataclass
class DragState:
    """Mutable state of one drag run; single-threaded by contract."""

    generator: Generator
    config: DragConfig
    base_latent: LayeredLatent  # rows M.. stay frozen for the whole run
    trainable: np.ndarray  # (M*D,) raw prefix or (n_pca,) coefficients
    basis: PcaBasis | None
    pairs: list[HandlePair]
    frozen: np.ndarray  # per-pair bool, true once within stopping distance
    opt_state: OptimizerState
    initial_image: np.ndarray
    iteration: int = 0
    trace: list[StepRecord] = field(default_factory=list)
    _features: np.ndarray | None = None
    _features_dirty: bool = True

    @property
    def m_layers(self) -> int:
        return self.config.w_plus_layers

    def current_prefix(self) -> np.ndarray:
        """Realized (M, D) prefix of the latent."""
        d = self.generator.params.latent_dim
        if self.basis is not None:
            flat = pca_reconstruct(self.basis, self.trainable)
        else:
            flat = self.trainable
        return flat.reshape(self.m_layers, d)

    def current_latent(self) -> LayeredLatent:
        return self.base_latent.with_prefix(self.current_prefix())

    def set_trainable(self, values: np.ndarray) -> None:
        self.trainable = values
        self._features_dirty = True

    def features(self) -> np.ndarray:
        """Feature map of the current latent, cached between mutations."""
        if self._features_dirty or self._features is None:
            self._features = self.generator.features(self.current_latent())
            self._features_dirty = False
        return self._features

    def distances(self) -> np.ndarray:
        return np.array([p.distance() for p in self.pairs])

    def refresh_frozen(self) -> None:
        self.frozen |= self.distances() <= self.config.stopping_distance

    @property
    def all_frozen(self) -> bool:
        return bool(self.frozen.all())

    @property
    def converged(self) -> bool:
        return bool(self.distances().max() <= self.config.stopping_distance)

    @property
    def terminated(self) -> bool:
        return self.all_frozen or self.iteration >= self.config.max_iterations


def _check_point(point: np.ndarray, limit: float, what: str) -> None:
    if not (0.0 <= point[0] <= limit and 0.0 <= point[1] <= limit):
        raise OutOfBounds(f"{what} ({point[0]}, {point[1]}) outside [0, {limit}]^2")


# Bases are deterministic per (generator params, layer count, sample count);
# grid cells that share a layer count reuse one fit.
_BASIS_CACHE: dict[tuple, PcaBasis] = {}
_BASIS_LOCK = threading.Lock()


def prefix_basis(
    generator: Generator, m_layers: int, n_samples: int = 1000
) -> PcaBasis:
    """Full-rank PCA basis over the flattened first ``m_layers`` rows."""
    key = (generator.params, m_layers, n_samples)
    with _BASIS_LOCK:
        hit = _BASIS_CACHE.get(key)
    if hit is not None:
        return hit
    flat = np.stack(
        [
            generator.sample_latent(i).layers[:m_layers].ravel()
            for i in range(n_samples)
        ]
    )
    basis = fit_pca(flat, min(flat.shape[1], n_samples))
    with _BASIS_LOCK:
        _BASIS_CACHE[key] = basis
    return basis


def init_session(
    generator: Generator,
    latent: LayeredLatent,
    pairs: list[tuple],
    config: DragConfig,
    basis: PcaBasis | None = None,
) -> DragState:
    """Create a drag session over ``pairs`` of ((hx, hy), (tx, ty)) points.

    The initial image, feature map and handle descriptors are captured at
    the realized start of the optimization: for a reduced run that is the
    projection of the latent prefix onto the basis span.
    """
    params: GeneratorParams = generator.params
    config.validate(params)
    if not pairs:
        raise BadConfig("at least one handle/target pair is required")
    limit = float(params.feature_resolution - 1)
    m = config.w_plus_layers
    d = params.latent_dim
    prefix_flat = latent.layers[:m].ravel().copy()

    if config.reduced:
        if basis is None:
            basis = prefix_basis(generator, m)
        if basis.dim != m * d:
            raise BadConfig(
                f"basis dimension {basis.dim} does not match {m}x{d} prefix"
            )
        if basis.n_components < config.n_pca:
            raise BadConfig(
                f"basis holds {basis.n_components} components, need {config.n_pca}"
            )
        basis = basis.truncated(config.n_pca)
        trainable = pca_project(basis, prefix_flat)
    else:
        basis = None
        trainable = prefix_flat

    state = DragState(
        generator=generator,
        config=config,
        base_latent=latent.copy(),
        trainable=trainable,
        basis=basis,
        pairs=[],
        frozen=np.zeros(len(pairs), dtype=bool),
        opt_state=OptimizerState.fresh(
            trainable.size, AdamWHyper(lr=config.learning_rate)
        ),
        initial_image=np.empty(0),
    )
    start_latent = state.current_latent()
    state.initial_image = generator.render(start_latent)
    fmap = generator.features(start_latent)
    state._features = fmap
    state._features_dirty = False
    for raw_handle, raw_target in pairs:
        handle = np.asarray(raw_handle, dtype=np.float64)
        target = np.asarray(raw_target, dtype=np.float64)
        _check_point(handle, limit, "handle")
        _check_point(target, limit, "target")
        descriptor = sample_feature(fmap, handle)
        state.pairs.append(HandlePair(handle, target, descriptor))
    state.refresh_frozen()
    return state
