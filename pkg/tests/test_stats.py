"""Trajectory statistics: radial densities, L1 comparisons, ensemble
energy moments, structure functions, time-averaged measures.  The Gibbs
comparisons run against the quadrature references in oracles.py."""

import math

import numpy as np
import pytest
from scipy.stats import norm

import oracles
from conftest import count_modes
from pilotwave.integrator import (BlowUpError, InitialPast, SimConfig,
                                  Trajectory, simulate)
from pilotwave.model import ModelParams, Potential, energy_phi
from pilotwave.stats import (MomentSeries, RadialPdf, ensemble_energy_moments,
                             ks_statistic, linear_trend_ci, pdf_l1_distance,
                             peak_location, radial_pdf, structure_function,
                             time_averaged_measure, write_moment_series_csv,
                             write_radial_pdf_csv, write_structure_csv)


def synth_traj(positions, velocities=None, dt=0.25):
    positions = np.asarray(positions, dtype=np.float64)
    if positions.ndim == 1:
        positions = positions[:, None]
    if velocities is None:
        velocities = np.zeros_like(positions)
    times = np.arange(positions.shape[0]) * dt
    return Trajectory(times=times, positions=positions,
                      velocities=np.asarray(velocities, dtype=np.float64))


@pytest.fixture(scope="module")
def canonical_run_2d():
    # one desk-scale canonical-parameter run shared by the measure tests
    cfg = SimConfig(params=ModelParams(dim=2), dt=2.0 ** -6, t_max=8000.0,
                    seed=20260815, stride=8)
    return simulate(cfg)


# -------------------------------------------------------------- radial pdf


def test_radial_pdf_zero_trajectory_first_bin():
    traj = synth_traj(np.zeros((500, 2)))
    pdf = radial_pdf(traj, burn_in_fraction=0.0, bins=10, r_max=1.0)
    width = pdf.widths[0]
    assert abs(pdf.density[0] - 1.0 / width) < 1e-12
    assert np.all(pdf.density[1:] == 0.0)
    assert pdf.n_samples == 500


def test_radial_pdf_uniform_bin_centers():
    r = np.tile(np.arange(10) / 10.0 + 0.05, 40)
    traj = synth_traj(np.column_stack([r, np.zeros_like(r)]))
    pdf = radial_pdf(traj, burn_in_fraction=0.0, bins=10, r_max=1.0)
    assert np.allclose(pdf.density, 1.0, atol=1e-12)


def test_radial_pdf_normalization_and_burn_in(canonical_run_2d):
    pdf = radial_pdf(canonical_run_2d, burn_in_fraction=0.1, bins=100, r_max=2.0)
    assert abs(float(np.sum(pdf.density * pdf.widths)) - 1.0) <= 1e-12
    assert np.all(pdf.density >= 0.0)
    assert pdf.burn_in_time == 0.1 * canonical_run_2d.times[-1]
    assert pdf.n_samples <= canonical_run_2d.times.size


def test_radial_pdf_excludes_samples_beyond_range():
    r = np.array([0.1] * 90 + [5.0] * 10)
    traj = synth_traj(np.column_stack([r, np.zeros_like(r)]))
    pdf = radial_pdf(traj, burn_in_fraction=0.0, bins=4, r_max=1.0)
    assert pdf.n_samples == 90
    assert abs(float(np.sum(pdf.density * pdf.widths)) - 1.0) <= 1e-12


def test_radial_pdf_validation():
    traj = synth_traj(np.zeros((50, 2)))
    with pytest.raises(ValueError, match="burn_in_fraction"):
        radial_pdf(traj, burn_in_fraction=1.0)
    with pytest.raises(ValueError, match="edges"):
        RadialPdf(edges=np.array([0.0, 1.0]), density=np.array([1.0, 2.0]),
                  n_samples=3)
    with pytest.raises(ValueError, match="integrates"):
        RadialPdf(edges=np.array([0.0, 0.5, 1.0]),
                  density=np.array([1.0, 2.0]), n_samples=3)


def test_radial_pdf_canonical_run_peak_near_orbit(canonical_run_2d, orbit_solution):
    pdf = radial_pdf(canonical_run_2d, bins=100, r_max=2.0)
    assert count_modes(pdf) == 1
    assert abs(peak_location(pdf) - orbit_solution.r0) < 0.05 * orbit_solution.r0


# ------------------------------------------------------------- L1 distance


def _pdf_from_radii(r, bins=4, r_max=2.0):
    traj = synth_traj(np.column_stack([r, np.zeros_like(r)]))
    return radial_pdf(traj, burn_in_fraction=0.0, bins=bins, r_max=r_max)


def test_pdf_l1_examples():
    a = _pdf_from_radii(np.tile([0.25, 0.75], 50))
    same = _pdf_from_radii(np.tile([0.25, 0.75], 50))
    half = _pdf_from_radii(np.tile([0.75, 1.25], 50))
    disjoint = _pdf_from_radii(np.tile([1.25, 1.75], 50))
    assert pdf_l1_distance(a, same) == 0.0
    assert abs(pdf_l1_distance(a, half) - 1.0) < 1e-12
    assert abs(pdf_l1_distance(a, disjoint) - 2.0) < 1e-12


def test_pdf_l1_requires_shared_edges():
    a = _pdf_from_radii(np.tile([0.25, 0.75], 50), bins=4)
    b = _pdf_from_radii(np.tile([0.25, 0.75], 50), bins=5)
    with pytest.raises(ValueError, match="edges"):
        pdf_l1_distance(a, b)


def test_pdf_l1_is_a_metric_on_random_densities():
    rng = np.random.default_rng(42)
    edges = np.linspace(0.0, 2.0, 33)
    widths = np.diff(edges)

    def random_pdf():
        d = rng.random(32)
        d /= np.sum(d * widths)
        return RadialPdf(edges=edges, density=d, n_samples=1)

    for _ in range(20):
        a, b, c = random_pdf(), random_pdf(), random_pdf()
        assert pdf_l1_distance(a, b) == pdf_l1_distance(b, a)
        assert pdf_l1_distance(a, c) <= (pdf_l1_distance(a, b)
                                         + pdf_l1_distance(b, c) + 1e-12)
        assert 0.0 <= pdf_l1_distance(a, b) <= 2.0


# ---------------------------------------------------------------- peak


def test_peak_location_single_occupied_bin():
    pdf = _pdf_from_radii(np.full(100, 0.75), bins=4, r_max=2.0)
    assert peak_location(pdf) == 0.75


def test_peak_location_recovers_parabola_vertex():
    edges = np.linspace(0.0, 2.0, 5)
    centers = 0.5 * (edges[:-1] + edges[1:])
    density = 2.0 - (centers - 0.9) ** 2
    density /= np.sum(density * np.diff(edges))
    pdf = RadialPdf(edges=edges, density=density, n_samples=1)
    assert abs(peak_location(pdf) - 0.9) < 1e-12


def test_peak_location_plateau_ties_to_smaller_radius():
    edges = np.linspace(0.0, 2.0, 5)
    density = np.array([0.2, 0.5, 0.5, 0.2])
    density = density / np.sum(density * np.diff(edges))
    pdf = RadialPdf(edges=edges, density=density, n_samples=1)
    # argmax picks the left plateau bin; refinement may reach at most its
    # upper edge, never the interior of the right bin
    assert peak_location(pdf) <= edges[2] + 1e-15


def test_peak_location_edge_bin_falls_back_to_center():
    edges = np.linspace(0.0, 2.0, 5)
    density = np.array([1.2, 0.4, 0.3, 0.1])
    density = density / np.sum(density * np.diff(edges))
    pdf = RadialPdf(edges=edges, density=density, n_samples=1)
    assert peak_location(pdf) == pdf.centers[0]


# ------------------------------------------------------------ moments


def _gibbs_1d_config(seed, t_max=1000.0):
    params = ModelParams(kappa=0.42, alpha=0.0, sigma=0.08,
                         spring_k=0.35, dim=1)
    return SimConfig(params=params, dt=2.0 ** -6, t_max=t_max,
                     seed=seed, stride=8)


def test_ensemble_moments_all_zero_without_noise():
    params = ModelParams(alpha=0.0, sigma=0.0, dim=1)
    cfgs = [SimConfig(params=params, dt=2.0 ** -6, t_max=2.0, seed=s)
            for s in (1, 2)]
    series = ensemble_energy_moments(cfgs, p=2.0)
    assert isinstance(series, MomentSeries)
    assert np.array_equal(series.mean_phi, np.zeros_like(series.times))
    assert np.array_equal(series.mean_phi_p, np.zeros_like(series.times))
    assert series.n_members == 2


def test_ensemble_moments_match_gibbs_quadrature():
    cfgs = [_gibbs_1d_config(700 + i) for i in range(6)]
    series = ensemble_energy_moments(cfgs, p=2.0)
    assert np.all(series.mean_phi >= 0.0)
    assert np.all(np.isfinite(series.mean_phi_p))
    est = float(np.mean(series.mean_phi[series.times >= 500.0]))
    ref = oracles.gibbs_moments(0.08, 0.42, 0.35)[2]
    assert abs(est - ref) < 0.05 * ref


def test_ensemble_moments_order_independent():
    cfgs = [_gibbs_1d_config(40 + i, t_max=50.0) for i in range(4)]
    serial = ensemble_energy_moments(cfgs, max_workers=1)
    threaded = ensemble_energy_moments(cfgs, max_workers=4)
    assert np.array_equal(serial.mean_phi, threaded.mean_phi)
    assert np.array_equal(serial.mean_phi_p, threaded.mean_phi_p)
    permuted = ensemble_energy_moments(list(reversed(cfgs)))
    assert np.allclose(serial.mean_phi, permuted.mean_phi,
                       rtol=1e-12, atol=1e-15)


def test_ensemble_moments_validation():
    with pytest.raises(ValueError, match="at least one"):
        ensemble_energy_moments([])
    a = _gibbs_1d_config(1, t_max=50.0)
    b = SimConfig(params=a.params, dt=2.0 ** -6, t_max=50.0, seed=2, stride=4)
    with pytest.raises(ValueError, match="output time grid"):
        ensemble_energy_moments([a, b])


def test_ensemble_moments_blowup_names_member():
    params = ModelParams(kappa=1e-4, alpha=0.0, sigma=0.0, dim=1)
    bad = SimConfig(params=params, dt=0.5, t_max=100.0, seed=3,
                    initial_past=InitialPast.constant([1.0]))
    good = SimConfig(params=ModelParams(alpha=0.0, sigma=0.0, dim=1),
                     dt=0.5, t_max=100.0, seed=3)
    with pytest.raises(BlowUpError, match="member 1") as exc:
        ensemble_energy_moments([good, bad], max_workers=1)
    assert exc.value.member == 1


# --------------------------------------------------- structure functions


def test_structure_function_linear_trajectory():
    n, dt = 512, 0.25
    t = np.arange(n) * dt
    traj = synth_traj(t, velocities=np.ones((n, 1)), dt=dt)
    lags = np.array([1, 2, 3]) * dt
    sf = structure_function(traj, lags)
    assert np.allclose(sf.sx4, lags ** 4, rtol=1e-12)
    assert abs(sf.slope_x - 4.0) < 1e-9
    assert np.all(sf.sv4 == 0.0)
    assert math.isnan(sf.slope_v)


def test_structure_function_plane_motion():
    n, dt = 512, 0.25
    t = np.arange(n) * dt
    traj = synth_traj(np.column_stack([t, 2.0 * t]),
                      velocities=np.tile([1.0, 2.0], (n, 1)), dt=dt)
    sf = structure_function(traj, np.array([1, 2, 4]) * dt)
    assert np.allclose(sf.sx4, (5.0 * sf.lags ** 2) ** 2, rtol=1e-12)
    assert abs(sf.slope_x - 4.0) < 1e-9


def test_structure_function_brownian_velocity_scaling():
    # surrogate with exactly Brownian velocity: E|dv|^4 = 3 sig^4 tau^2
    rng = np.random.default_rng(3)
    n, dt, sig = 1 << 17, 1.0 / 64.0, 0.3
    w = np.cumsum(rng.normal(0.0, sig * math.sqrt(dt), size=(n, 1)), axis=0)
    traj = synth_traj(np.zeros((n, 1)), velocities=w, dt=dt)
    sf = structure_function(traj, np.array([1, 2, 4, 8, 16, 32]) * dt)
    assert abs(sf.slope_v - 2.0) < 0.15
    assert abs(sf.sv4[0] / (3.0 * sig ** 4 * dt ** 2) - 1.0) < 0.1


def test_structure_function_time_translation_invariant():
    rng = np.random.default_rng(9)
    vals = rng.normal(size=(256, 2)).cumsum(axis=0)
    base = synth_traj(vals, velocities=vals[::-1], dt=0.5)
    shifted = Trajectory(times=base.times + 100.0, positions=base.positions,
                         velocities=base.velocities)
    lags = np.array([1, 2, 4]) * 0.5
    a = structure_function(base, lags)
    b = structure_function(shifted, lags)
    assert np.array_equal(a.sx4, b.sx4)
    assert np.array_equal(a.sv4, b.sv4)
    assert a.slope_x == b.slope_x and a.slope_v == b.slope_v


def test_structure_function_validation():
    traj = synth_traj(np.zeros((4000, 1)), dt=0.25)
    with pytest.raises(ValueError, match="three lags"):
        structure_function(traj, [0.25, 0.5])
    with pytest.raises(ValueError, match="positive"):
        structure_function(traj, [-0.25, 0.25, 0.5])
    with pytest.raises(ValueError, match="integer multiples"):
        structure_function(traj, [0.25, 0.3, 0.5])
    with pytest.raises(ValueError, match="tenth"):
        structure_function(traj, [0.25, 0.5, 200.0])


# --------------------------------------------------- time-averaged measure


def test_time_averaged_measure_constant_point_mass():
    traj = synth_traj(np.tile([0.3, 0.4], (50, 1)))
    r = time_averaged_measure(traj, "r")
    assert np.all(r == 0.5)


def test_time_averaged_measure_observables_and_grid():
    pos = np.arange(12.0).reshape(6, 2)
    vel = -pos
    traj = synth_traj(pos, velocities=vel, dt=1.0)
    assert time_averaged_measure(traj, "x").shape == (6, 2)
    assert np.array_equal(time_averaged_measure(traj, "v"), vel)
    sub = time_averaged_measure(traj, "r", t_grid=[0.0, 3.0])
    assert np.array_equal(sub, np.hypot(pos[[0, 3], 0], pos[[0, 3], 1]))
    one_d = synth_traj(np.arange(5.0))
    assert time_averaged_measure(one_d, "x").shape == (5,)
    with pytest.raises(ValueError, match="unknown observable"):
        time_averaged_measure(traj, "spin")
    with pytest.raises(ValueError, match="non-empty"):
        time_averaged_measure(traj, "r", t_grid=[])
    with pytest.raises(ValueError, match="config"):
        time_averaged_measure(traj, "phi")


def test_time_averaged_measure_phi_matches_energy():
    cfg = SimConfig(params=ModelParams(alpha=0.0, dim=1), dt=2.0 ** -6,
                    t_max=2.0, seed=6)
    traj = simulate(cfg)
    phi = time_averaged_measure(traj, "phi")
    direct = energy_phi(traj.positions, traj.velocities,
                        Potential(spring_k=0.35))
    assert np.array_equal(phi, np.asarray(direct))


def test_time_averaged_measure_gibbs_velocity_ks():
    # alpha=0 marginal of v is centered normal with variance sigma^2/(2 kappa)
    traj = simulate(_gibbs_1d_config(20260815, t_max=2e4))
    keep = traj.times >= 0.1 * traj.times[-1]
    v = time_averaged_measure(traj, "v")[keep]
    assert v.size >= 1e5
    scale = 0.08 / math.sqrt(2 * 0.42)
    assert ks_statistic(v, lambda s: norm.cdf(s, scale=scale)) < 0.01


def test_time_averaged_measure_stationary_under_doubling(canonical_run_2d):
    # Q_T vs Q_2T on the radius, desk scale
    half = (canonical_run_2d.times.size - 1) // 2 + 1
    first = Trajectory(times=canonical_run_2d.times[:half],
                       positions=canonical_run_2d.positions[:half],
                       velocities=canonical_run_2d.velocities[:half])
    pdf_t = radial_pdf(first, bins=50, r_max=2.0)
    pdf_2t = radial_pdf(canonical_run_2d, bins=50, r_max=2.0)
    assert pdf_l1_distance(pdf_t, pdf_2t) < 0.05


# ----------------------------------------------------------- ks / trend


def test_ks_statistic_uniform_grid():
    n = 1000
    s = (np.arange(n) + 0.5) / n
    ks = ks_statistic(s, lambda x: x)
    assert abs(ks - 0.5 / n) < 1e-12
    with pytest.raises(ValueError):
        ks_statistic([], lambda x: x)


def test_linear_trend_ci_recovers_slope():
    t = np.linspace(0.0, 10.0, 320)
    slope, lo, hi = linear_trend_ci(t, 3.0 * t + 1.0 + 0.01 * np.sin(17.0 * t))
    assert lo <= 3.0 <= hi
    assert abs(slope - 3.0) < 0.01


def test_linear_trend_ci_flat_noise_contains_zero():
    rng = np.random.default_rng(11)
    t = np.linspace(0.0, 10.0, 640)
    slope, lo, hi = linear_trend_ci(t, rng.normal(0.0, 0.3, size=640))
    assert lo <= 0.0 <= hi


def test_linear_trend_ci_needs_enough_samples():
    with pytest.raises(ValueError, match="too short"):
        linear_trend_ci(np.arange(10.0), np.arange(10.0), n_blocks=16)


# ----------------------------------------------------------------- CSV


def test_write_radial_pdf_csv(tmp_path):
    pdf = _pdf_from_radii(np.tile([0.25, 0.75], 50))
    path = tmp_path / "pdf.csv"
    write_radial_pdf_csv(pdf, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "r_lo,r_hi,density"
    assert len(lines) == pdf.density.size + 1
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], pdf.edges[:-1])
    assert np.array_equal(data[:, 1], pdf.edges[1:])
    assert np.array_equal(data[:, 2], pdf.density)


def test_write_moment_series_csv(tmp_path):
    params = ModelParams(alpha=0.0, sigma=0.0, dim=1)
    cfgs = [SimConfig(params=params, dt=2.0 ** -6, t_max=2.0, seed=s)
            for s in (1, 2)]
    series = ensemble_energy_moments(cfgs)
    path = tmp_path / "moments.csv"
    write_moment_series_csv(series, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,mean_phi,mean_phi_p"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], series.times)
    assert np.array_equal(data[:, 1], series.mean_phi)


def test_write_structure_csv(tmp_path):
    n, dt = 512, 0.25
    traj = synth_traj(np.arange(n) * dt, velocities=np.ones((n, 1)), dt=dt)
    sf = structure_function(traj, np.array([1, 2, 3]) * dt)
    path = tmp_path / "structure.csv"
    write_structure_csv(sf, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# slope_x=")
    assert "slope_v=nan" in lines[0]
    assert float(lines[0].split("slope_x=")[1].split(",")[0]) == sf.slope_x
    assert lines[1] == "lag,sx4,sv4"
    data = np.loadtxt(path, delimiter=",", skiprows=2)
    assert np.array_equal(data[:, 0], sf.lags)
    assert np.array_equal(data[:, 1], sf.sx4)
