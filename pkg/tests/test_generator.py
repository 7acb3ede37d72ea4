from pathlib import Path

import numpy as np
import pytest

from latentdrag.errors import BadShape, NonFiniteLatent, OutOfBounds
from latentdrag.generator import (
    Generator,
    GeneratorParams,
    LayeredLatent,
    read_raw,
    sample_feature,
    write_raw,
)
from latentdrag.generator.core import _ROW_AMP, _ROW_CX, _ROW_CY, _ROW_SIGMA
from latentdrag.numerics import fit_pca

FIXTURES = Path(__file__).parent / "fixtures"

FIXTURE_PARAMS = GeneratorParams(
    seed=5,
    n_layers=3,
    latent_dim=8,
    blobs_per_layer=2,
    channels=3,
    height=48,
    width=48,
    feature_channels=4,
    feature_resolution=24,
)

SMALL_PARAMS = GeneratorParams(
    seed=2,
    n_layers=2,
    latent_dim=6,
    blobs_per_layer=2,
    channels=2,
    height=32,
    width=32,
    feature_channels=3,
    feature_resolution=16,
)


def finite_difference_grad(fn, latent: LayeredLatent, h: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar function of the latent."""
    grad = np.zeros_like(latent.layers)
    for l in range(latent.layers.shape[0]):
        for d in range(latent.layers.shape[1]):
            bump = np.zeros_like(latent.layers)
            bump[l, d] = h
            plus = fn(LayeredLatent(latent.layers + bump))
            minus = fn(LayeredLatent(latent.layers - bump))
            grad[l, d] = (plus - minus) / (2.0 * h)
    return grad


# ----------------------------------------------------------------------
# determinism and sampling


def test_equal_seeds_are_bit_identical():
    a = Generator(GeneratorParams(seed=21))
    b = Generator(GeneratorParams(seed=21))
    lat_a = a.sample_latent(3)
    lat_b = b.sample_latent(3)
    assert np.array_equal(lat_a.layers, lat_b.layers)
    assert np.array_equal(a.render(lat_a), b.render(lat_b))
    assert np.array_equal(a.features(lat_a), b.features(lat_b))


def test_different_sample_seeds_differ():
    gen = Generator(SMALL_PARAMS)
    assert not np.array_equal(gen.sample_latent(0).layers, gen.sample_latent(1).layers)


def test_zero_layer_noise_broadcasts_rows():
    gen = Generator(GeneratorParams(seed=4, layer_noise_eps=0.0))
    latent = gen.sample_latent(11)
    assert np.array_equal(latent.layers, np.tile(latent.layers[0], (12, 1)))


def test_layer_noise_perturbs_rows():
    gen = Generator(GeneratorParams(seed=4, layer_noise_eps=0.1))
    latent = gen.sample_latent(11)
    assert not np.array_equal(latent.layers[0], latent.layers[1])


def test_variance_ratios_invariant_to_layer_count_without_noise():
    # Tiled rows tile the covariance, which scales every eigenvalue by the
    # same factor and leaves the ratios unchanged.
    gen = Generator(GeneratorParams(seed=9, latent_dim=8, layer_noise_eps=0.0))
    samples = [gen.sample_latent(i).layers for i in range(400)]
    curves = {}
    for m in (3, 6, 12):
        flat = np.stack([s[:m].ravel() for s in samples])
        curves[m] = fit_pca(flat, 8 * m).explained_variance_ratio
    short = min(curves, key=lambda m: len(curves[m]))
    n = len(curves[short])
    for m in curves:
        assert np.max(np.abs(curves[m][:n] - curves[short])) <= 1e-9


# ----------------------------------------------------------------------
# rendering


def test_zero_latent_image_matches_golden_fixture():
    gen = Generator(FIXTURE_PARAMS)
    image = gen.render(LayeredLatent(np.zeros((3, 8))))
    golden = read_raw(FIXTURES / "zero_latent_image.f64")
    assert np.array_equal(image, golden)


def test_zero_latent_features_match_golden_fixture():
    gen = Generator(FIXTURE_PARAMS)
    fmap = gen.features(LayeredLatent(np.zeros((3, 8))))
    golden = read_raw(FIXTURES / "zero_latent_features.f64")
    assert np.array_equal(fmap, golden)


def test_render_stays_in_unit_interval():
    gen = Generator(SMALL_PARAMS)
    for seed in range(3):
        img = gen.render(gen.sample_latent(seed))
        assert img.min() > 0.0 and img.max() < 1.0


def test_amplitude_perturbation_is_local():
    params = GeneratorParams(
        seed=3, n_layers=1, latent_dim=8, blobs_per_layer=1,
        channels=2, height=64, width=64, feature_channels=3, feature_resolution=32,
    )
    gen = Generator(params)
    latent = gen.sample_latent(0)
    blob = gen.blob_parameters(latent)
    amp_row = gen._maps[0, 0, _ROW_AMP]
    bump = 0.5 * amp_row / np.dot(amp_row, amp_row)  # raises amplitude by 0.5
    moved = LayeredLatent(latent.layers + bump)
    delta = np.abs(gen.render(moved) - gen.render(latent)).max(axis=0)
    sx = params.width / params.feature_resolution
    cx, cy = blob.centers[0] * sx
    sigma = blob.sigmas[0] * sx
    ys, xs = np.ogrid[: params.height, : params.width]
    dist2 = (xs - cx) ** 2 + (ys - cy) ** 2
    outside = delta[dist2 > (3.5 * sigma) ** 2]
    inside_peak = delta[dist2 <= (3.0 * sigma) ** 2].max()
    assert inside_peak > 1e-3
    assert outside.max() <= 0.05 * inside_peak


def test_nonfinite_latent_rejected():
    gen = Generator(SMALL_PARAMS)
    bad = np.zeros((2, 6))
    bad[0, 0] = np.nan
    with pytest.raises(NonFiniteLatent):
        gen.render(LayeredLatent(bad))
    with pytest.raises(NonFiniteLatent):
        gen.features(LayeredLatent(bad))


# ----------------------------------------------------------------------
# feature field structure


def test_feature_field_obeys_lipschitz_bound():
    gen = Generator(SMALL_PARAMS)
    latent = gen.sample_latent(5)
    fmap = gen.features(latent)
    blob = gen.blob_parameters(latent)
    # Max slope of a unit Gaussian bump along one axis is exp(-1/2)/sigma.
    slope = np.exp(-0.5) / blob.sigmas
    bound = np.abs(blob.features).T @ slope  # per channel
    dx = np.abs(np.diff(fmap, axis=2)).max(axis=(1, 2))
    dy = np.abs(np.diff(fmap, axis=1)).max(axis=(1, 2))
    assert np.all(dx <= bound * (1 + 1e-9))
    assert np.all(dy <= bound * (1 + 1e-9))


def test_center_translation_moves_feature_bump():
    params = GeneratorParams(
        seed=6, n_layers=1, latent_dim=12, blobs_per_layer=1,
        channels=2, height=64, width=64, feature_channels=3, feature_resolution=32,
    )
    gen = Generator(params)
    latent = gen.sample_latent(1)
    geometry_rows = gen._maps[0, 0, [_ROW_CX, _ROW_CY, _ROW_SIGMA, _ROW_AMP]]
    delta = 3.0
    # Least-norm latent move that shifts cx by delta and pins cy/sigma/amp.
    bump, *_ = np.linalg.lstsq(geometry_rows, np.array([delta, 0, 0, 0]), rcond=None)
    moved = LayeredLatent(latent.layers + bump)
    blob0 = gen.blob_parameters(latent)
    blob1 = gen.blob_parameters(moved)
    assert np.allclose(blob1.centers[0] - blob0.centers[0], [delta, 0.0], atol=1e-9)
    channel = int(np.argmax(np.abs(blob0.features[0])))
    before = np.abs(gen.features(latent)[channel])
    after = np.abs(gen.features(moved)[channel])
    by, bx = np.unravel_index(np.argmax(before), before.shape)
    ay, ax = np.unravel_index(np.argmax(after), after.shape)
    assert (ax - bx, ay - by) == (3, 0)


# ----------------------------------------------------------------------
# exact gradients


def test_feature_vjp_zero_cotangent():
    gen = Generator(SMALL_PARAMS)
    latent = gen.sample_latent(0)
    fr = SMALL_PARAMS.feature_resolution
    grad = gen.feature_vjp(latent, np.zeros((3, fr, fr)))
    assert np.array_equal(grad, np.zeros((2, 6)))


def test_feature_vjp_matches_finite_differences():
    rng = np.random.default_rng(42)
    for trial in range(3):
        gen = Generator(SMALL_PARAMS)
        latent = gen.sample_latent(trial)
        fr = SMALL_PARAMS.feature_resolution
        cot = rng.normal(size=(3, fr, fr))
        analytic = gen.feature_vjp(latent, cot)
        numeric = finite_difference_grad(
            lambda lat: float(np.sum(cot * gen.features(lat))), latent
        )
        denom = max(np.linalg.norm(numeric), 1e-12)
        assert np.linalg.norm(analytic - numeric) / denom <= 1e-4


def test_render_vjp_matches_finite_differences():
    rng = np.random.default_rng(43)
    gen = Generator(SMALL_PARAMS)
    latent = gen.sample_latent(9)
    cot = rng.normal(size=(2, 32, 32))
    analytic = gen.render_vjp(latent, cot)
    numeric = finite_difference_grad(
        lambda lat: float(np.sum(cot * gen.render(lat))), latent
    )
    denom = max(np.linalg.norm(numeric), 1e-12)
    assert np.linalg.norm(analytic - numeric) / denom <= 1e-4


def test_feature_vjp_is_linear_in_cotangent():
    rng = np.random.default_rng(44)
    gen = Generator(SMALL_PARAMS)
    latent = gen.sample_latent(2)
    fr = SMALL_PARAMS.feature_resolution
    c1 = rng.normal(size=(3, fr, fr))
    c2 = rng.normal(size=(3, fr, fr))
    combined = gen.feature_vjp(latent, c1 + c2)
    split = gen.feature_vjp(latent, c1) + gen.feature_vjp(latent, c2)
    assert np.max(np.abs(combined - split)) <= 1e-10


# ----------------------------------------------------------------------
# sampling reads


def test_sample_feature_integer_point_is_exact():
    gen = Generator(SMALL_PARAMS)
    fmap = gen.features(gen.sample_latent(0))
    assert np.array_equal(sample_feature(fmap, (5, 7)), fmap[:, 7, 5])


def test_sample_feature_midpoint_is_mean():
    fmap = np.zeros((1, 4, 4))
    fmap[0, 1, 1] = 2.0
    fmap[0, 1, 2] = 4.0
    assert np.allclose(sample_feature(fmap, (1.5, 1.0)), [3.0])


def test_sample_feature_matches_bilinear_oracle():
    rng = np.random.default_rng(3)
    fmap = rng.normal(size=(2, 10, 10))
    for _ in range(20):
        x, y = rng.uniform(0, 9, size=2)
        x0, y0 = int(x), int(y)
        x0, y0 = min(x0, 8), min(y0, 8)
        fx, fy = x - x0, y - y0
        oracle = (
            fmap[:, y0, x0] * (1 - fx) * (1 - fy)
            + fmap[:, y0, x0 + 1] * fx * (1 - fy)
            + fmap[:, y0 + 1, x0] * (1 - fx) * fy
            + fmap[:, y0 + 1, x0 + 1] * fx * fy
        )
        assert np.allclose(sample_feature(fmap, (x, y)), oracle, atol=1e-12)


def test_sample_feature_out_of_bounds():
    fmap = np.zeros((1, 8, 8))
    for point in [(-0.1, 0), (0, 7.2), (8, 0)]:
        with pytest.raises(OutOfBounds):
            sample_feature(fmap, point)


# ----------------------------------------------------------------------
# raster io


def test_raw_dump_round_trip_is_bit_exact(tmp_path):
    gen = Generator(SMALL_PARAMS)
    img = gen.render(gen.sample_latent(1))
    path = tmp_path / "img.f64"
    write_raw(img, path)
    assert np.array_equal(read_raw(path), img)
    header = path.read_bytes()[:16]
    assert header[:4] == b"LDF1"
    assert np.array_equal(
        np.frombuffer(header[4:], dtype="<u4"), np.array(img.shape, dtype="<u4")
    )


def test_raw_reader_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"not a raster")
    with pytest.raises(BadShape):
        read_raw(path)


def test_png_round_trip_within_quantization(tmp_path):
    from latentdrag.generator import read_png, write_png

    gen = Generator(SMALL_PARAMS)
    img = gen.render(gen.sample_latent(2))[:3]
    rgb = np.concatenate([img, img[:1]])[:3]  # 3 channels for PNG
    path = tmp_path / "img.png"
    write_png(rgb, path)
    back = read_png(path)
    assert back.shape == rgb.shape
    assert np.max(np.abs(back - rgb)) <= 0.5 / 255 + 1e-12  # 8-bit rounding
