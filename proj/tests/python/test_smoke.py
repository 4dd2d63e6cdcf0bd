"""Smoke tests for the python bindings."""

import math

import pytest

import warpnls


def test_profile_and_geometry():
    p = warpnls.ManifoldProfile(4, 1)
    assert p.n == 4
    assert p.scattering_dimension() == 10.0
    phi, dphi, d2phi, d3phi = warpnls.phi_eval(p, 1.0)
    assert phi == pytest.approx(7.0 / 6.0, rel=1e-14)
    assert dphi == pytest.approx(1.5, rel=1e-14)

    hyp = warpnls.ManifoldProfile(4, "inf")
    assert hyp.is_hyperbolic
    assert math.isinf(hyp.scattering_dimension())
    w = warpnls.strichartz_weight(hyp, 1.0)
    assert w == pytest.approx(math.sinh(1.0) ** 1.5, rel=1e-12)
    lap_a, neg_bilap_a = warpnls.morawetz_weights(hyp, 1.0)
    assert neg_bilap_a == pytest.approx(3 * math.cosh(1.0) / math.sinh(1.0) ** 3, rel=1e-12)
    V, V_eff, r2V = warpnls.effective_potential(warpnls.ManifoldProfile(3, "inf"), 2.0)
    assert V == pytest.approx(1.0, rel=1e-12)


def test_positivity_certificate():
    rep = warpnls.positivity_certificate(warpnls.ManifoldProfile(4, 1), [0.5, 2.0, 10.0])
    assert rep["all_pass"]
    assert rep["worst_margin_a"] > 0


def test_exponents():
    assert warpnls.is_admissible(4, 2.0, 4.0)
    res = warpnls.solve_exponents_hyperbolic(4, 0.5)
    assert res["status"] == "FEASIBLE"
    sol = res["solution"]
    assert 0 < sol["alpha"] < 1.0
    assert sol["theta"] > 1.0

    res_m = warpnls.solve_exponents_M(4, 1, 0.19)
    assert res_m["status"] == "INFEASIBLE"

    assert warpnls.bootstrap_threshold(2.0, 1.0) == pytest.approx(0.25)


def test_evolution_and_diagnostics():
    grid = warpnls.RadialGrid(warpnls.ManifoldProfile(4, "inf"), 40.0, 1024)
    state = warpnls.gaussian_data(grid, 1.0, 1.0)
    m0 = state.mass()
    assert m0 > 0

    traj = warpnls.evolve(state, 2.0, "free", dt=5e-3, sample_every=0.5)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(2.0)
    final = traj.state_at(2.0)
    assert final.mass() == pytest.approx(m0, rel=1e-9)

    defect, reliable = traj.scattering_defect(1.0, 2.0)
    assert defect < 1e-8  # free flow scatters trivially
    assert reliable

    prof = traj.extract_profile(2.0, rho_min=0.4, rho_max=4.0, points=100)
    assert len(prof["rho"]) == 100
    assert max(prof["F"]) > 0


def test_run_experiment(tmp_path):
    config = """
profile.n = 4
profile.k = 1
sigma = 0.5
mode = nonlinear
grid.r_max = 40
grid.m = 512
time.dt = 5e-3
time.t_final = 1
time.sample_every = 0.5
data.kind = gaussian
data.amplitude = 1.0
data.width = 1.0
domain.xi_max = 4.0
"""
    out = warpnls.run_experiment(config, str(tmp_path / "run"))
    assert out["exit_code"] == 0
    assert (tmp_path / "run" / "report.json").exists()
    assert (tmp_path / "run" / "series.csv").exists()
