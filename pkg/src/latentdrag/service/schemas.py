"""Request and response bodies for the session API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class GeneratorOverrides(BaseModel):
    seed: int | None = None
    n_layers: int | None = None
    latent_dim: int | None = None
    blobs_per_layer: int | None = None
    channels: int | None = None
    height: int | None = None
    width: int | None = None
    feature_channels: int | None = None
    feature_resolution: int | None = None
    layer_noise_eps: float | None = None


class CreateSessionRequest(BaseModel):
    seed: int = 42
    scenario: str | None = Field(
        default=None, description="'canonical' for the built-in demo scenario"
    )
    generator: GeneratorOverrides | None = None


class PairModel(BaseModel):
    handle: tuple[float, float]
    target: tuple[float, float]


class SessionInfo(BaseModel):
    session_id: str
    state: str
    image_png_base64: str
    image_shape: tuple[int, int, int]
    feature_resolution: int
    n_layers: int
    latent_dim: int
    suggested_pair: PairModel | None = None


class ConfigRequest(BaseModel):
    learning_rate: float = 0.05
    n_pca: int | None = None
    w_plus_layers: int = 3
    stopping_distance: float = 10.0
    max_iterations: int = 150
    r1: int = 3
    r2: int = 12
    pairs: list[PairModel]


class ConfigResponse(BaseModel):
    session_id: str
    state: str
    learning_rate: float
    n_pca: int | None
    w_plus_layers: int
    stopping_distance: float
    max_iterations: int
    r1: int
    r2: int
    pairs: list[PairModel]


class ImageResponse(BaseModel):
    session_id: str
    state: str
    iteration: int
    image_png_base64: str
    pairs: list[PairModel]


class StateResponse(BaseModel):
    session_id: str
    state: str
    iteration: int = 0


class StepResponse(BaseModel):
    session_id: str
    state: str
    record: dict | None = None
    summary: dict | None = None
