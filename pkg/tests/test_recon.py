"""Iterative reconstruction: relaxed k-space/Radon iterations, NLM, CS baseline."""

import numpy as np
import pytest

import oracles
from finrad import (
    CartesianSpec,
    CsBaselineConfig,
    Dims,
    DivergenceError,
    FractalSpec,
    GridGeometry,
    HSchedule,
    KSpace,
    NlmParams,
    NoiseModel,
    ReconConfig,
    SamplingMask,
    ScheduleKind,
    Solver,
    build_cartesian,
    build_pfrac,
    cs_baseline,
    ffr,
    fsirt,
    h_schedule_eval,
    nlm_denoise,
    psnr,
    rss_combine,
    shepp_logan,
    sinogram_from_kspace,
    undersample,
    zero_fill,
)
from finrad.radon import Sinogram, drt_forward
from finrad.recon import _grad2, _grad2_adjoint, _haar2, _ihaar2, _relaxed_iterations, _soft, _tv_value


def _full_mask(n):
    return SamplingMask(GridGeometry(n), np.ones((n, n), dtype=bool), None)


def _phantom_kspace(n=17, r=0.4, mu=3, ctr=0, seed=1, noise=0.0, noise_seed=1):
    img = shepp_logan(n)
    mask = build_pfrac(FractalSpec(GridGeometry(n), r, mu, ctr, seed))
    return img, mask, undersample(img, mask, NoiseModel(noise), noise_seed)


# ---------------------------------------------------------------- zero_fill

def test_zero_fill_full_mask_recovers_image():
    img = shepp_logan(17)
    y = undersample(img, _full_mask(17))
    assert np.abs(zero_fill(y) - img).max() < 1e-10


def test_zero_fill_dc_only_constant_image():
    n = 9
    sel = np.zeros((n, n), dtype=bool)
    sel[0, 0] = True
    mask = SamplingMask(GridGeometry(n), sel, None)
    y = undersample(np.full((n, n), 7.0), mask)
    assert np.abs(zero_fill(y) - 7.0).max() < 1e-12


def test_zero_fill_artifact_character_fractal_vs_rows():
    # matched reduction: slice-union artifacts spread noise-like, row
    # masks smear coherently, so fractal zero-fill scores higher
    n = 257
    img = shepp_logan(n)
    g = GridGeometry(n)
    mf = build_pfrac(FractalSpec(g, 42 / n, 16, 0, 1))
    mc = build_cartesian(CartesianSpec(g, 42 / n, 0.0, Dims.OneD, 0, 1))
    pf = psnr(img, np.abs(zero_fill(undersample(img, mf))))
    pc = psnr(img, np.abs(zero_fill(undersample(img, mc))))
    assert pf > pc


# ---------------------------------------------------------------- ffr

def test_ffr_lambda_one_is_projector_fixed_point():
    _, _, y = _phantom_kspace()
    cfg = lambda iters: ReconConfig(Solver.FFR, iterations=iters, lambda_relax=1.0)
    one = ffr(y, cfg(1)).image
    many = ffr(y, cfg(8)).image
    assert np.abs(one - zero_fill(y)).max() < 1e-12
    assert np.abs(many - one).max() < 1e-10


def test_ffr_full_mask_exact_any_lambda():
    img = shepp_logan(17)
    y = undersample(img, _full_mask(17))
    for lam in (0.3, 1.0, 1.7):
        out = ffr(y, ReconConfig(Solver.FFR, iterations=3, lambda_relax=lam)).image
        assert np.abs(out - img).max() < 1e-10


def test_ffr_enforces_data_consistency_after_last_update():
    # with lambda=1 the final update overwrites sampled k-space exactly,
    # whatever the denoiser did in between
    _, mask, y = _phantom_kspace(noise=2.0)
    cfg = ReconConfig(Solver.FFR, iterations=7, lambda_relax=1.0, denoise_every=2,
                      schedule=HSchedule(ScheduleKind.Staged, 8.0))
    out = ffr(y, cfg).image
    got = np.fft.fft2(out, norm="ortho")[mask.selected]
    assert np.abs(got - y.data[mask.selected]).max() < 1e-10


def test_ffr_improves_over_zero_fill_with_denoising():
    img, _, y = _phantom_kspace(n=257, r=64 / 257, mu=16, ctr=21)
    cfg = ReconConfig(Solver.FFR, iterations=30, denoise_every=3,
                      schedule=HSchedule(ScheduleKind.Staged, 6.0))
    out = ffr(y, cfg, ground=img).image
    gain = psnr(img, np.abs(out)) - psnr(img, np.abs(zero_fill(y)))
    assert gain >= 1.0


def test_ffr_iteration_log():
    img, _, y = _phantom_kspace()
    cfg = ReconConfig(Solver.FFR, iterations=6, denoise_every=2,
                      schedule=HSchedule(ScheduleKind.Staged, 4.0))
    res = ffr(y, cfg, ground=img)
    assert len(res.log) == 6
    assert [r.iteration for r in res.log] == list(range(1, 7))
    assert res.log[0].h_applied is None  # t=0 never denoises
    assert res.log[2].h_applied == 4.0  # t=2 denoise at full strength
    assert all(r.psnr_vs_ground is not None for r in res.log)
    csv = res.log_csv()
    assert csv.splitlines()[0] == "iter,residual_l2,h_applied,psnr_vs_ground"
    assert len(csv.splitlines()) == 7


def test_ffr_rejects_wrong_solver_tag():
    _, _, y = _phantom_kspace()
    with pytest.raises(ValueError):
        ffr(y, ReconConfig(Solver.FSIRT, iterations=1))


# ---------------------------------------------------------------- fsirt

def test_fsirt_full_slope_set_exact_in_one_iteration():
    img = shepp_logan(17)
    g = drt_forward(img.astype(complex))
    out = fsirt(g, ReconConfig(Solver.FSIRT, iterations=1, lambda_relax=1.0)).image
    assert np.abs(out - img).max() < 1e-9


def test_fsirt_zero_sinogram_stays_zero():
    geom = GridGeometry(17)
    slopes = geom.all_slopes()[:5]
    g = Sinogram(geom, slopes, np.zeros((5, 17), dtype=complex))
    out = fsirt(g, ReconConfig(Solver.FSIRT, iterations=4)).image
    assert np.abs(out).max() == 0.0


@pytest.mark.parametrize("lam", [0.7, 1.0])
def test_ffr_fsirt_equivalence_per_iterate(lam):
    # dual routes: mask-multiply FFT iteration vs direct Radon iteration
    img, mask, y = _phantom_kspace(n=17, r=0.4, mu=3, ctr=0)
    g = sinogram_from_kspace(y)
    for iters in (1, 2, 5, 12):
        a = ffr(y, ReconConfig(Solver.FFR, iterations=iters, lambda_relax=lam)).image
        b = fsirt(g, ReconConfig(Solver.FSIRT, iterations=iters, lambda_relax=lam), mask=mask).image
        assert np.abs(a - b).max() < 1e-10


def test_fsirt_mask_preconditions():
    img, mask, y = _phantom_kspace(n=17, r=0.4, mu=3, ctr=0)
    g = sinogram_from_kspace(y)
    cfg = ReconConfig(Solver.FSIRT, iterations=1)
    fsirt(g, cfg, mask=mask)  # matching mask accepted
    disk = build_pfrac(FractalSpec(GridGeometry(17), 0.4, 3, ctr=2, seed=1))
    with pytest.raises(ValueError):
        fsirt(g, cfg, mask=disk)
    cart = build_cartesian(CartesianSpec(GridGeometry(17), 0.4, 0.0, Dims.OneD, 0, 1))
    with pytest.raises(ValueError):
        fsirt(g, cfg, mask=cart)
    other = build_pfrac(FractalSpec(GridGeometry(17), 0.4, 3, ctr=0, seed=99))
    assert set(other.provenance.slopes) != set(mask.provenance.slopes)
    with pytest.raises(ValueError):
        fsirt(g, cfg, mask=other)


# ---------------------------------------------------------------- NLM

def test_nlm_h_zero_is_identity():
    rng = np.random.default_rng(0)
    img = rng.normal(size=(16, 16))
    out = nlm_denoise(img, NlmParams(h=0.0))
    assert (out == img).all() and out is not img


def test_nlm_constant_image_unchanged():
    img = np.full((16, 16), 42.0)
    for h in (1.0, 10.0, 100.0):
        assert np.abs(nlm_denoise(img, NlmParams(h=h)) - 42.0).max() < 1e-9


def test_nlm_reduces_noise_mse():
    rng = np.random.default_rng(3)
    clean = np.full((32, 32), 128.0)
    noisy = clean + rng.normal(0, 20.0, size=(32, 32))
    out = nlm_denoise(noisy, NlmParams(h=10.0, patch_radius=1, search_radius=5))
    assert np.mean((out - clean) ** 2) < np.mean((noisy - clean) ** 2)


def test_nlm_complex_channels_filtered_independently():
    rng = np.random.default_rng(4)
    re = rng.normal(size=(12, 12))
    im = rng.normal(size=(12, 12))
    params = NlmParams(h=2.0, search_radius=2)
    out = nlm_denoise(re + 1j * im, params)
    want = nlm_denoise(re, params) + 1j * nlm_denoise(im, params)
    assert np.abs(out - want).max() < 1e-12


def test_nlm_params_validation():
    with pytest.raises(ValueError):
        NlmParams(h=-1.0)
    with pytest.raises(ValueError):
        NlmParams(h=1.0, patch_radius=0)
    with pytest.raises(ValueError):
        NlmParams(h=1.0, patch_radius=3, search_radius=2)


# ---------------------------------------------------------------- schedules

def test_staged_schedule_values():
    sch = HSchedule(ScheduleKind.Staged, 6.0)
    assert h_schedule_eval(sch, 0, 100) == 6.0
    assert h_schedule_eval(sch, 49, 100) == 6.0
    assert h_schedule_eval(sch, 50, 100) == 3.0
    assert h_schedule_eval(sch, 89, 100) == 3.0
    assert h_schedule_eval(sch, 90, 100) == 1.5
    assert h_schedule_eval(sch, 95, 100) == 1.5
    vals = [h_schedule_eval(sch, t, 100) for t in range(101)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_power_schedule_values():
    sch = HSchedule(ScheduleKind.PowerCurve, 4.0, exponent=1.0)
    assert h_schedule_eval(sch, 100, 100) == 0.0
    assert h_schedule_eval(sch, 0, 100) == 4.0
    assert h_schedule_eval(sch, 50, 100) == pytest.approx(2.0)
    quad = HSchedule(ScheduleKind.PowerCurve, 4.0, exponent=2.0)
    assert h_schedule_eval(quad, 50, 100) == pytest.approx(1.0)


def test_schedule_validation():
    with pytest.raises(ValueError):
        HSchedule(ScheduleKind.Staged, -1.0)
    sch = HSchedule(ScheduleKind.Staged, 2.0)
    with pytest.raises(ValueError):
        h_schedule_eval(sch, 5, 4)


# ---------------------------------------------------------------- guard

def test_divergence_guard_trips_on_geometric_growth():
    x0 = np.ones((4, 4), dtype=complex)

    def residual_of(x):
        return x, float(np.linalg.norm(x))

    cfg = ReconConfig(Solver.FFR, iterations=50, lambda_relax=1.0)
    with pytest.raises(DivergenceError):
        _relaxed_iterations(x0, residual_of, lambda r: r, cfg, NlmParams(),
                            float(np.linalg.norm(x0)), None, 255.0)


def test_recon_config_validation():
    with pytest.raises(ValueError):
        ReconConfig(Solver.FFR, lambda_relax=0.0)
    with pytest.raises(ValueError):
        ReconConfig(Solver.FFR, lambda_relax=2.0)
    with pytest.raises(ValueError):
        ReconConfig(Solver.FFR, iterations=0)
    with pytest.raises(ValueError):
        ReconConfig(Solver.FFR, denoise_every=0)


def test_kspace_validation():
    n = 9
    sel = np.zeros((n, n), dtype=bool)
    sel[0, 0] = True
    mask = SamplingMask(GridGeometry(n), sel, None)
    data = np.zeros((n, n), dtype=complex)
    KSpace(mask, data)
    bad = data.copy()
    bad[3, 3] = 1.0  # off-mask energy
    with pytest.raises(ValueError):
        KSpace(mask, bad)
    with pytest.raises(ValueError):
        KSpace(mask, np.zeros((n, n)))  # real data


# ---------------------------------------------------------------- cs pieces

def test_haar_round_trip_and_energy():
    rng = np.random.default_rng(5)
    for n in (16, 17):  # even and odd (odd keeps a passthrough sample)
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        c = _haar2(x)
        assert np.abs(_ihaar2(c) - x).max() < 1e-12
        assert np.linalg.norm(c) == pytest.approx(np.linalg.norm(x), rel=1e-12)


def test_soft_threshold_scalar_oracle():
    vals = np.array([3.0, -2.0, 0.5, 0.0, -0.25])
    out = _soft(vals, 1.0)
    assert np.allclose(out, [2.0, -1.0, 0.0, 0.0, 0.0])
    z = _soft(np.array([3 + 4j]), 1.0)  # complex shrinks magnitude only
    assert abs(abs(z[0]) - 4.0) < 1e-12
    assert abs(np.angle(z[0]) - np.angle(3 + 4j)) < 1e-12


def test_gradient_adjoint_identity():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    px = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    py = rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9))
    gx, gy = _grad2(x)
    lhs = np.vdot(px, gx) + np.vdot(py, gy)
    rhs = np.vdot(_grad2_adjoint(px, py), x).conjugate()
    assert abs(lhs - rhs.conjugate()) < 1e-10


def test_cs_objective_monotone():
    _, _, y = _phantom_kspace(n=17, r=0.4, mu=3)
    res = cs_baseline(y, CsBaselineConfig(iterations=40))
    obj = np.array(res.objectives)
    assert len(obj) == 41  # initial value plus one per iteration
    assert (np.diff(obj) <= 1e-8 * max(1.0, obj[0])).all()


def test_cs_zero_weights_equals_zero_fill():
    _, _, y = _phantom_kspace(n=17, r=0.4, mu=3)
    res = cs_baseline(y, CsBaselineConfig(wavelet_weight=0.0, tv_weight=0.0, iterations=30))
    assert np.abs(res.image - zero_fill(y)).max() < 1e-8


def test_cs_tv_dominated_beats_zero_fill():
    img = shepp_logan(64)
    mask = build_cartesian(CartesianSpec(GridGeometry(64), 0.25, 2.0, Dims.TwoD, 4, 3))
    y = undersample(img, mask)
    res = cs_baseline(y, CsBaselineConfig(wavelet_weight=1e-3, tv_weight=1.0, iterations=160))
    gain = psnr(img, np.abs(res.image)) - psnr(img, np.abs(zero_fill(y)))
    assert gain >= 3.0


def test_tv_value_is_anisotropic_l1():
    x = np.zeros((4, 4))
    x[1, 1] = 1.0  # 2 unit jumps per axis
    assert _tv_value(x) == pytest.approx(4.0)


# ---------------------------------------------------------------- rss

def test_rss_single_channel_is_magnitude():
    rng = np.random.default_rng(7)
    ch = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    assert np.abs(rss_combine([ch]) - np.abs(ch)).max() < 1e-12


def test_rss_two_identical_channels():
    rng = np.random.default_rng(8)
    ch = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    assert np.abs(rss_combine([ch, ch]) - np.sqrt(2) * np.abs(ch)).max() < 1e-12


def test_rss_matches_loop_oracle():
    rng = np.random.default_rng(9)
    chans = [rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)) for _ in range(8)]
    assert np.abs(rss_combine(chans) - oracles.rss_loop(chans)).max() < 1e-12
