"""YAML grid configuration mirroring the GridSpec fields.

Example document:

    learning_rates: [0.1, 0.05, 0.002]
    n_pca_options: [regular, 64, 128, 256, 512]
    layer_options: [3, 6, 12]
    seeds: [13, 42, 999]
    output_dir: runs/grid
    workers: 4
    scenario:
      drag_distance: 20.0
      generator:
        seed: 7
        blobs_per_layer: 1
"""

from __future__ import annotations

from dataclasses import fields
from pathlib import Path

import yaml

from ..errors import BadConfig
from ..generator import GeneratorParams
from .grid import GridSpec
from .scenario import CANONICAL_GENERATOR, DragScenario


def _parse_npca(value) -> int | None:
    if value is None or (isinstance(value, str) and value.lower() == "regular"):
        return None
    return int(value)


def _parse_generator(data: dict) -> GeneratorParams:
    known = {f.name for f in fields(GeneratorParams)}
    unknown = set(data) - known
    if unknown:
        raise BadConfig(f"unknown generator fields: {sorted(unknown)}")
    merged = {f.name: getattr(CANONICAL_GENERATOR, f.name) for f in fields(GeneratorParams)}
    merged.update(data)
    return GeneratorParams(**merged)


def load_grid_spec(path) -> GridSpec:
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise BadConfig(f"{path} does not hold a configuration mapping")
    scenario_data = raw.pop("scenario", {}) or {}
    generator = _parse_generator(scenario_data.get("generator", {}) or {})
    scenario = DragScenario(
        generator_params=generator,
        drag_distance=float(scenario_data.get("drag_distance", 20.0)),
    )
    kwargs = {"scenario": scenario}
    if "learning_rates" in raw:
        kwargs["learning_rates"] = tuple(float(v) for v in raw.pop("learning_rates"))
    if "n_pca_options" in raw:
        kwargs["n_pca_options"] = tuple(_parse_npca(v) for v in raw.pop("n_pca_options"))
    if "layer_options" in raw:
        kwargs["layer_options"] = tuple(int(v) for v in raw.pop("layer_options"))
    if "seeds" in raw:
        kwargs["seeds"] = tuple(int(v) for v in raw.pop("seeds"))
    if "output_dir" in raw:
        kwargs["output_dir"] = raw.pop("output_dir")
    if "workers" in raw:
        kwargs["workers"] = int(raw.pop("workers"))
    if raw:
        raise BadConfig(f"unknown grid fields: {sorted(raw)}")
    return GridSpec(**kwargs)
