"""Batch driver for the hyperparameter grid."""

from __future__ import annotations

import json
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

from ..engine import (
    DragConfig,
    RunRecord,
    annotate_image,
    init_session,
    prefix_basis,
    run_drag,
    write_trace,
)
from ..errors import OutputUnwritable
from ..generator import Generator, write_png
from .scenario import DragScenario, canonical_scenario

# Table-defaults for the full sweep: three learning rates, the unreduced
# baseline plus four component counts, three layer depths, three seeds.
DEFAULT_LEARNING_RATES = (0.1, 0.05, 0.002)
DEFAULT_N_PCA_OPTIONS = (None, 64, 128, 256, 512)
DEFAULT_LAYER_OPTIONS = (3, 6, 12)
DEFAULT_SEEDS = (13, 42, 999)


@dataclass(frozen=True)
class GridSpec:
    learning_rates: tuple = DEFAULT_LEARNING_RATES
    n_pca_options: tuple = DEFAULT_N_PCA_OPTIONS
    layer_options: tuple = DEFAULT_LAYER_OPTIONS
    seeds: tuple = DEFAULT_SEEDS
    scenario: DragScenario = field(default_factory=canonical_scenario)
    output_dir: str | Path | None = None
    workers: int = 4

    def validate(self) -> None:
        if not (self.learning_rates and self.n_pca_options and self.layer_options and self.seeds):
            raise ValueError("grid axes must be non-empty")

    @property
    def n_runs(self) -> int:
        return (
            len(self.learning_rates)
            * len(self.n_pca_options)
            * len(self.layer_options)
            * len(self.seeds)
        )


@dataclass
class GridRun:
    """One executed grid run, labeled by its requested cell coordinates."""

    n_pca_requested: int | None
    n_pca_effective: int | None
    layers: int
    learning_rate: float
    seed: int
    record: RunRecord | None = None
    error: str | None = None

    @property
    def cell(self) -> tuple:
        return (self.layers, self.n_pca_requested, self.learning_rate)


def npca_label(n_pca: int | None) -> str:
    return "regular" if n_pca is None else str(n_pca)


def cell_dir_name(layers: int, n_pca: int | None, lr: float) -> str:
    return f"npca-{npca_label(n_pca)}_layers-{layers}_lr-{lr:g}"


def effective_n_pca(n_pca: int | None, layers: int, latent_dim: int) -> int | None:
    """Requested component counts above the desk-scale full rank are capped."""
    if n_pca is None:
        return None
    return min(n_pca, layers * latent_dim)


def _write_run_outputs(run: GridRun, state, record: RunRecord, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trace(record, out_dir / "trace.jsonl")
    summary = record.summary_dict()
    summary["n_pca_requested"] = run.n_pca_requested
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    final_image = state.generator.render(state.current_latent())
    write_png(state.initial_image, out_dir / "initial.png")
    write_png(final_image, out_dir / "final.png")
    pairs = [(p.handle, p.target) for p in state.pairs]
    fr = state.generator.params.feature_resolution
    write_png(annotate_image(final_image, pairs, fr), out_dir / "annotated.png")


def run_grid(spec: GridSpec) -> list[GridRun]:
    """Execute every cell x seed combination; failures are recorded, not raised.

    Runs are deterministic per (spec, cell coordinates); wall-clock fields
    are the only parts that vary between invocations.
    """
    spec.validate()
    out_root: Path | None = None
    if spec.output_dir is not None:
        out_root = Path(spec.output_dir)
        try:
            out_root.mkdir(parents=True, exist_ok=True)
            (out_root / ".write-probe").write_text("ok")
            (out_root / ".write-probe").unlink()
        except OSError as exc:
            raise OutputUnwritable(f"cannot write to {out_root}: {exc}") from exc

    generator = Generator(spec.scenario.generator_params)
    latent_dim = generator.params.latent_dim
    # Pre-fit shared bases so pool workers never race on the cache.
    for layers in sorted(set(spec.layer_options)):
        if any(n is not None for n in spec.n_pca_options):
            prefix_basis(generator, layers)

    jobs = [
        GridRun(
            n_pca_requested=n_pca,
            n_pca_effective=effective_n_pca(n_pca, layers, latent_dim),
            layers=layers,
            learning_rate=lr,
            seed=seed,
        )
        for layers, n_pca, lr, seed in product(
            spec.layer_options, spec.n_pca_options, spec.learning_rates, spec.seeds
        )
    ]

    def execute(run: GridRun) -> GridRun:
        try:
            latent, pairs = spec.scenario.build(generator, run.seed)
            config = DragConfig(
                learning_rate=run.learning_rate,
                n_pca=run.n_pca_effective,
                w_plus_layers=run.layers,
                seed=run.seed,
            )
            state = init_session(generator, latent, pairs, config)
            run.record = run_drag(state)
            if out_root is not None:
                cell = cell_dir_name(run.layers, run.n_pca_requested, run.learning_rate)
                _write_run_outputs(
                    run, state, run.record, out_root / cell / f"seed-{run.seed}"
                )
        except Exception:
            run.error = traceback.format_exc(limit=4)
        return run

    workers = max(1, spec.workers)
    if workers == 1:
        results = [execute(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(execute, jobs))
    return results


def load_grid_runs(output_dir) -> list[GridRun]:
    """Rebuild grid runs from the summary.json files under an output tree."""
    root = Path(output_dir)
    runs: list[GridRun] = []
    for summary_path in sorted(root.glob("npca-*_layers-*_lr-*/seed-*/summary.json")):
        data = json.loads(summary_path.read_text())
        record = RunRecord(
            learning_rate=data["learning_rate"],
            n_pca=data["n_pca"],
            w_plus_layers=data["w_plus_layers"],
            seed=data["seed"],
            iterations=data["iterations"],
            converged=data["converged"],
            t_total=data["t_total"],
            t_opt_total=data["t_opt_total"],
            t_track_total=data["t_track_total"],
            ssim=data["ssim"],
            ssim_per_time=data["ssim_per_time"],
            final_mean_distance=data["final_mean_distance"],
            final_max_distance=data["final_max_distance"],
            trace=[],
        )
        runs.append(
            GridRun(
                n_pca_requested=data.get("n_pca_requested", data["n_pca"]),
                n_pca_effective=data["n_pca"],
                layers=data["w_plus_layers"],
                learning_rate=data["learning_rate"],
                seed=data["seed"],
                record=record,
            )
        )
    return runs
