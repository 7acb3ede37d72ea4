"""Command-line front end.

Grid, drag and alignment commands drive the core package directly; the
session API is exposed separately via ``latentdrag serve``.
"""

from __future__ import annotations

import json
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from .align import EditSpec, ProjectionConfig, edit_along_component, project_image, side_by_side, transfer_edit
from .engine import DragConfig, annotate_image, init_session, prefix_basis, run_drag, write_trace
from .errors import LatentDragError
from .generator import Generator, GeneratorParams, read_png, write_png
from .harness import (
    GridSpec,
    canonical_scenario,
    format_summary_table,
    load_grid_runs,
    load_grid_spec,
    run_grid,
    summarize,
    variance_report,
    write_summary_csv,
    write_variance_csv,
)


@click.group()
def main():
    """Latent-space drag editing toolkit."""


# ----------------------------------------------------------------------
# grid


@main.group()
def grid():
    """Hyperparameter grid execution and summarization."""


@grid.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="YAML grid configuration; defaults to the built-in sweep.")
@click.option("--output", "output_dir", type=click.Path(), default="runs/grid")
@click.option("--workers", type=int, default=None)
def grid_run(config_path, output_dir, workers):
    """Execute the full grid and write per-run artifacts plus summary.csv."""
    if config_path:
        spec = load_grid_spec(config_path)
        if spec.output_dir is None:
            spec = replace(spec, output_dir=output_dir)
    else:
        spec = GridSpec(output_dir=output_dir)
    if workers is not None:
        spec = replace(spec, workers=workers)
    click.echo(f"running {spec.n_runs} drag runs into {spec.output_dir} ...")
    runs = run_grid(spec)
    failures = [r for r in runs if r.error]
    summaries = summarize(runs)
    out_root = Path(spec.output_dir)
    write_summary_csv(summaries, out_root / "summary.csv")
    click.echo(format_summary_table(summaries))
    click.echo(f"summary.csv written to {out_root / 'summary.csv'}")
    if failures:
        for run in failures:
            click.echo(f"FAILED cell {run.cell} seed {run.seed}:\n{run.error}", err=True)
        sys.exit(1)


@grid.command("summarize")
@click.argument("directory", type=click.Path(exists=True))
def grid_summarize(directory):
    """Aggregate a previously written grid output tree."""
    runs = load_grid_runs(directory)
    if not runs:
        click.echo(f"no run summaries found under {directory}", err=True)
        sys.exit(1)
    summaries = summarize(runs)
    write_summary_csv(summaries, Path(directory) / "summary.csv")
    click.echo(format_summary_table(summaries))


# ----------------------------------------------------------------------
# variance report


@main.command("variance-report")
@click.option("--layers", default="3,6,12", help="Comma-separated layer depths.")
@click.option("--samples", type=int, default=1000)
@click.option("--generator-seed", type=int, default=None,
              help="Override the canonical generator seed.")
@click.option("--output", type=click.Path(), default="variance_report.csv")
def variance_report_cmd(layers, samples, generator_seed, output):
    """Cumulative explained-variance curves over the first M layers."""
    layer_options = tuple(int(v) for v in layers.split(","))
    params = canonical_scenario().generator_params
    if generator_seed is not None:
        params = replace(params, seed=generator_seed)
    rows = variance_report(params, layer_options, samples)
    write_variance_csv(rows, output)
    for m in layer_options:
        total = [r for r in rows if r.layers == m]
        head = ", ".join(f"{r.ratio:.3f}" for r in total[:5])
        click.echo(
            f"layers={m}: {len(total)} components, leading ratios [{head}], "
            f"cumulative end {total[-1].cumulative:.9f}"
        )
    click.echo(f"rows written to {output}")


# ----------------------------------------------------------------------
# single drag run


def _parse_points(points: tuple[str, ...]):
    pairs = []
    for spec_str in points:
        try:
            handle_str, target_str = spec_str.split(":")
            hx, hy = (float(v) for v in handle_str.split(","))
            tx, ty = (float(v) for v in target_str.split(","))
        except ValueError as exc:
            raise click.BadParameter(
                f"expected x1,y1:x2,y2 — got {spec_str!r}"
            ) from exc
        pairs.append((np.array([hx, hy]), np.array([tx, ty])))
    return pairs


@main.group()
def drag():
    """Single drag-optimization runs."""


@drag.command("run")
@click.option("--lr", type=float, default=0.05)
@click.option("--npca", default="regular",
              help="Component count, or 'regular' for the unreduced baseline.")
@click.option("--layers", type=int, default=3)
@click.option("--seed", type=int, default=42)
@click.option("--points", multiple=True,
              help="Handle:target pair as x1,y1:x2,y2; repeatable. "
                   "Defaults to the canonical scenario pair.")
@click.option("--output", type=click.Path(), default="runs/drag")
def drag_run(lr, npca, layers, seed, points, output):
    """Run one drag session and write its trace and images."""
    scenario = canonical_scenario()
    generator = Generator(scenario.generator_params)
    latent, default_pairs = scenario.build(generator, seed)
    pairs = _parse_points(points) if points else default_pairs
    n_pca = None if str(npca).lower() == "regular" else int(npca)
    config = DragConfig(learning_rate=lr, n_pca=n_pca, w_plus_layers=layers, seed=seed)
    try:
        state = init_session(generator, latent, pairs, config)
    except LatentDragError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    record = run_drag(state)
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(record, out / "trace.jsonl")
    write_png(state.initial_image, out / "initial.png")
    final = generator.render(state.current_latent())
    write_png(final, out / "final.png")
    overlay = annotate_image(
        final,
        [(p.handle, p.target) for p in state.pairs],
        generator.params.feature_resolution,
    )
    write_png(overlay, out / "annotated.png")
    flag = "converged" if record.converged else "capped (x)"
    click.echo(
        f"{flag} after {record.iterations} iterations; ssim={record.ssim:.4f}, "
        f"t_total={record.t_total:.3f}s -> artifacts in {out}"
    )
    sys.exit(0 if record.converged else 2)


# ----------------------------------------------------------------------
# alignment


@main.group()
def align():
    """Cross-generator projection, edits, and transfer."""


def _generator_for_seed(seed: int) -> Generator:
    base = canonical_scenario().generator_params
    return Generator(replace(base, seed=seed))


@align.command("project")
@click.option("--target", "target_path", type=click.Path(exists=True), required=True,
              help="8-bit PNG to invert (resampled to the generator raster).")
@click.option("--generator-seed", type=int, default=11)
@click.option("--lr", type=float, default=0.05)
@click.option("--iterations", type=int, default=500)
@click.option("--init", "init_policy", type=click.Choice(["mean_latent", "random_seeded"]),
              default="mean_latent")
@click.option("--output", type=click.Path(), default="runs/project")
def align_project(target_path, generator_seed, lr, iterations, init_policy, output):
    """Optimize a latent so the generator reproduces the target image."""
    generator = _generator_for_seed(generator_seed)
    p = generator.params
    target = read_png(target_path)
    if target.shape != (p.channels, p.height, p.width):
        target = _resample_nearest(target, p.channels, p.height, p.width)
    config = ProjectionConfig(
        learning_rate=lr, max_iterations=iterations, init_policy=init_policy
    )
    latent, trace = project_image(target, generator, config)
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    recon = generator.render(latent)
    write_png(recon, out / "projection.png")
    write_png(side_by_side([target, recon]), out / "panel.png")
    with open(out / "loss_trace.jsonl", "w") as fh:
        for i, value in enumerate(trace):
            fh.write(json.dumps({"iteration": i, "best_loss": float(value)}) + "\n")
    np.save(out / "latent.npy", latent.layers)
    click.echo(f"final best loss {trace[-1]:.3e}; artifacts in {out}")


def _resample_nearest(image: np.ndarray, c: int, h: int, w: int) -> np.ndarray:
    src = image[:c] if image.shape[0] >= c else np.repeat(image, c, axis=0)[:c]
    ys = (np.arange(h) * image.shape[1] / h).astype(int)
    xs = (np.arange(w) * image.shape[2] / w).astype(int)
    return src[:, ys][:, :, xs]


@align.command("edit")
@click.option("--generator-seed", type=int, default=11)
@click.option("--seed", type=int, default=42, help="Latent sample seed.")
@click.option("--component", type=int, default=0)
@click.option("--magnitude", type=float, default=3.0)
@click.option("--layer-start", type=int, default=0)
@click.option("--layer-end", type=int, default=3)
@click.option("--output", type=click.Path(), default="runs/edit")
def align_edit(generator_seed, seed, component, magnitude, layer_start, layer_end, output):
    """Move a latent along one principal direction and render both images."""
    generator = _generator_for_seed(generator_seed)
    latent = generator.sample_latent(seed)
    basis = prefix_basis(generator, layer_end - layer_start)
    edit = EditSpec(component, magnitude, (layer_start, layer_end))
    edited = edit_along_component(latent, basis, edit)
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    before = generator.render(latent)
    after = generator.render(edited)
    write_png(before, out / "before.png")
    write_png(after, out / "after.png")
    write_png(side_by_side([before, after]), out / "panel.png")
    click.echo(f"edit applied; panel in {out / 'panel.png'}")


@align.command("transfer")
@click.option("--gen-a", "seed_a", type=int, default=11)
@click.option("--gen-b", "seed_b", type=int, default=23)
@click.option("--seed", type=int, default=42)
@click.option("--component", type=int, default=0)
@click.option("--magnitude", type=float, default=3.0)
@click.option("--layer-start", type=int, default=0)
@click.option("--layer-end", type=int, default=3)
@click.option("--iterations", type=int, default=500)
@click.option("--output", type=click.Path(), default="runs/transfer")
def align_transfer(seed_a, seed_b, seed, component, magnitude, layer_start, layer_end,
                   iterations, output):
    """Edit in generator A and project the result into generator B."""
    gen_a = _generator_for_seed(seed_a)
    gen_b = _generator_for_seed(seed_b)
    latent_a = gen_a.sample_latent(seed)
    basis_a = prefix_basis(gen_a, layer_end - layer_start)
    edit = EditSpec(component, magnitude, (layer_start, layer_end))
    result = transfer_edit(
        gen_a, gen_b, latent_a, basis_a, edit,
        ProjectionConfig(max_iterations=iterations),
    )
    out = Path(output)
    out.mkdir(parents=True, exist_ok=True)
    panel = side_by_side(
        [result["image_a"], result["image_a_edited"], result["image_b_projected"]]
    )
    write_png(panel, out / "panel.png")
    with open(out / "loss_trace.jsonl", "w") as fh:
        for i, value in enumerate(result["loss_trace"]):
            fh.write(json.dumps({"iteration": i, "best_loss": float(value)}) + "\n")
    click.echo(
        f"transfer complete; final projection loss {result['loss_trace'][-1]:.3e}; "
        f"panel in {out / 'panel.png'}"
    )


# ----------------------------------------------------------------------
# service


@main.command("serve")
@click.option("--host", default=None, help="Bind address (env LATENTDRAG_HOST).")
@click.option("--port", type=int, default=None, help="Port (env LATENTDRAG_PORT).")
def serve(host, port):
    """Run the session API with uvicorn."""
    import os

    import uvicorn

    uvicorn.run(
        "latentdrag.service.app:app",
        host=host or os.environ.get("LATENTDRAG_HOST", "127.0.0.1"),
        port=port or int(os.environ.get("LATENTDRAG_PORT", "8010")),
        log_level="info",
    )


if __name__ == "__main__":
    main()
