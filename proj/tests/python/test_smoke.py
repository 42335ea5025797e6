import json
import math

import numpy as np
import pytest

import xsblab


def grid():
    return xsblab.SpaceTimeGrid(8 * math.pi, 32, 8.0, 32)


def band_limited(g, amplitude=0.3, seed=0):
    rng = np.random.default_rng(seed)
    xi = np.asarray(g.xi())
    u = (rng.standard_normal(g.nx) + 1j * rng.standard_normal(g.nx)) * np.exp(-xi**2)
    u[np.abs(np.fft.fftfreq(g.nx, 1.0 / g.nx)) > g.nx // 3] = 0
    return u * amplitude / xsblab.l2_norm(u, g)


def test_transforms_round_trip_and_parseval():
    g = grid()
    u = np.exp(-((np.asarray(g.x()) - 12.0) ** 2)).astype(complex)
    u_hat = xsblab.to_spectrum(u, g)
    assert np.allclose(xsblab.to_field(u_hat, g), u, atol=1e-13)
    dx = g.length / g.nx
    assert xsblab.l2_norm(u_hat, g) == pytest.approx(math.sqrt(np.sum(np.abs(u) ** 2) * dx), rel=1e-13)


def test_linear_estimate_ratio_is_data_independent():
    g = xsblab.SpaceTimeGrid(8 * math.pi, 32, 16.0, 1024)
    p = xsblab.PhaseParams()
    ratios = []
    for seed in range(3):
        u0 = band_limited(g, seed=seed)
        f = xsblab.windowed_free_solution(u0, 1.0, p, g)
        assert f.shape == (1024, 32)
        ratios.append(xsblab.xsb_norm(f, -0.2, 0.7, p, g) / xsblab.sobolev_norm(u0, -0.2, g))
    assert max(ratios) / min(ratios) < 1.05


def test_quadrature_checks():
    assert xsblab.check_el1(0.0, 0.0, 0.75)["value"] == pytest.approx(1.0, rel=1e-7)
    assert xsblab.check_el4(1.0, 1.0, 0.75)["value"] == pytest.approx(2.0, rel=1e-7)
    # Beta closed form at rho = 0, b = 0.7.
    assert xsblab.eval_I(0.0, 0.0, 0.0, 0.7) == pytest.approx(9.707793572048016, rel=1e-5)
    assert xsblab.dichotomy_I00(0.1, 0.3, r_max=256.0)[0] == "divergent"
    with pytest.raises(xsblab.XsbError):
        xsblab.eval_I(0.0, 0.0, 0.2, 0.5)


def test_counterexample_scaling():
    ns = [64.0, 128.0, 256.0, 512.0]
    slope, _, _ = xsblab.fit_scaling_exponent(ns, [xsblab.bump_xsb_norm(n, -0.25, 0.75) for n in ns])
    assert slope == pytest.approx(-0.5, abs=0.05)
    r = xsblab.counterexample_ratio(64.0, 0.0, 0.75)
    assert r["total_mass"] == pytest.approx(r["expected_mass"], rel=0.02)


def test_solvers_agree_for_small_data():
    g = grid()
    p = xsblab.PhaseParams(gamma=1.0)
    cfg = xsblab.SolveConfig(dt=0.01)
    u0 = band_limited(g, amplitude=0.1)
    times, split = xsblab.splitstep_evolve(u0, cfg, p, g, 0.5)
    _, pic, residuals, converged = xsblab.picard_iterate(u0, cfg, p, g, 0.5)
    assert converged
    assert len(times) == 51 and split.shape == (51, 32)
    gap = max(xsblab.l2_norm(a - b, g) for a, b in zip(split, pic))
    assert gap < 1e-6
    assert residuals[1] < 0.5 * residuals[0]


def test_harness_run(tmp_path):
    names = [entry[0] for entry in xsblab.catalog()]
    assert "evolve" in names and len(names) == 8
    config = json.dumps({"experiment": "evolve", "parameters": {"dt": 0.01, "t_final": 0.1,
                                                                "grid": {"nx": 32, "nt": 32}}})
    summary, code = xsblab.run(config, is_json=True, output_dir=str(tmp_path / "bundle"))
    assert code == 0
    assert summary["experiment"] == "evolve"
    assert (tmp_path / "bundle" / "summary.json").exists()
