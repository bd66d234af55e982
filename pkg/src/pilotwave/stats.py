"""Statistics of trajectories: radial histograms, moments, increments.

These are the estimators used to probe the long-time (invariant)
measure: the radial probability density of the position, ensemble
averages of the energy Phi and its powers along time, and fourth-order
structure functions of position/velocity increments whose log-log slope
diagnoses the small-lag scaling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as _student_t

from .integrator import BlowUpError, SimConfig, Trajectory, simulate
from .model import energy_phi


@dataclass(frozen=True, eq=False)
class RadialPdf:
    """Histogram density of r = |x|; integrates to one over its range."""

    edges: np.ndarray
    density: np.ndarray
    n_samples: int
    burn_in_time: float = 0.0

    def __post_init__(self):
        if self.edges.ndim != 1 or self.edges.size != self.density.size + 1:
            raise ValueError("edges must have one more entry than density")
        total = float(np.sum(self.density * np.diff(self.edges)))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"density integrates to {total!r}, not 1")

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


@dataclass(frozen=True, eq=False)
class MomentSeries:
    """Ensemble means of Phi and Phi^p on the shared output time grid."""

    times: np.ndarray
    mean_phi: np.ndarray
    mean_phi_p: np.ndarray
    p: float
    n_members: int


@dataclass(frozen=True, eq=False)
class StructureFunction:
    """Fourth-order increment moments and their fitted log-log slopes."""

    lags: np.ndarray
    sx4: np.ndarray
    sv4: np.ndarray
    slope_x: float
    slope_v: float


def _radii(traj: Trajectory) -> np.ndarray:
    return np.sqrt(np.sum(traj.positions**2, axis=1))


def _post_burn_in(traj: Trajectory, burn_in_fraction: float) -> np.ndarray:
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ValueError(f"burn_in_fraction must lie in [0, 1), got {burn_in_fraction}")
    cut = burn_in_fraction * traj.times[-1]
    keep = traj.times >= cut
    if not np.any(keep):
        raise ValueError("no samples left after burn-in")
    return keep


def radial_pdf(traj: Trajectory, burn_in_fraction: float = 0.1,
               bins: int = 200, r_max: float | None = None) -> RadialPdf:
    """Radial density of the position samples after discarding burn-in.

    r_max fixes the histogram range [0, r_max] so that two runs can
    share bin edges; by default the range adapts to the data.
    """
    keep = _post_burn_in(traj, burn_in_fraction)
    r = _radii(traj)[keep]
    if r_max is None:
        top = float(np.max(r))
        r_max = top if top > 0.0 else 1.0
    edges = np.linspace(0.0, r_max, bins + 1)
    inside = int(np.count_nonzero(r <= r_max))
    if inside == 0:
        raise ValueError("no samples inside the histogram range")
    density, edges = np.histogram(r, bins=edges, density=True)
    return RadialPdf(edges=edges, density=density, n_samples=inside,
                     burn_in_time=float(burn_in_fraction * traj.times[-1]))


def pdf_l1_distance(a: RadialPdf, b: RadialPdf) -> float:
    """int |a - b| dr for densities on identical edges; lies in [0, 2]."""
    if not np.array_equal(a.edges, b.edges):
        raise ValueError("pdf_l1_distance requires identical bin edges")
    return float(np.sum(np.abs(a.density - b.density) * a.widths))


def peak_location(pdf: RadialPdf) -> float:
    """Mode estimate: argmax bin refined by a three-point parabola.

    Ties go to the smaller radius; edge bins and degenerate curvature
    fall back to the bin center.
    """
    i = int(np.argmax(pdf.density))
    centers = pdf.centers
    if i == 0 or i == pdf.density.size - 1:
        return float(centers[i])
    y0, y1, y2 = pdf.density[i - 1], pdf.density[i], pdf.density[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0.0 or abs(denom) < 1e-300:
        return float(centers[i])
    shift = 0.5 * (y0 - y2) / denom
    shift = min(0.5, max(-0.5, shift))
    return float(centers[i] + shift * pdf.widths[i])


def ensemble_energy_moments(configs: list[SimConfig], p: float = 2.0,
                            max_workers: int | None = None) -> MomentSeries:
    """Mean Phi and Phi^p over an ensemble, per output time.

    Members are integrated concurrently (the stepping loop releases the
    GIL); the aggregation runs in member order so the result does not
    depend on scheduling.
    """
    if not configs:
        raise ValueError("ensemble must contain at least one config")
    base = configs[0]
    for c in configs[1:]:
        if c.n_output != base.n_output or c.dt != base.dt or c.stride != base.stride:
            raise ValueError("ensemble members must share the output time grid")
    def run_member(pair):
        index, member = pair
        try:
            return simulate(member)
        except BlowUpError as exc:
            raise BlowUpError(exc.step_index, exc.time, member=index) from None

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        trajs = list(pool.map(run_member, enumerate(configs)))
    times = trajs[0].times
    acc = np.zeros_like(times)
    acc_p = np.zeros_like(times)
    for traj, cfg in zip(trajs, configs):
        phi = energy_phi(traj.positions, traj.velocities, cfg.potential)
        acc += phi
        acc_p += phi**p
    n = len(configs)
    return MomentSeries(times=times, mean_phi=acc / n, mean_phi_p=acc_p / n,
                        p=p, n_members=n)


def structure_function(traj: Trajectory, lags) -> StructureFunction:
    """S_x(tau) = <|x(t+tau) - x(t)|^4> and likewise for v, with slopes.

    Lags must be positive multiples of the output sampling interval and
    there must be at least three of them for the log-log fit.  A series
    that is identically zero (e.g. velocity increments of uniform
    motion) gets slope nan.
    """
    lags = np.asarray(lags, dtype=np.float64)
    if lags.size < 3:
        raise ValueError("need at least three lags to fit a slope")
    if np.any(lags <= 0.0):
        raise ValueError("lags must be positive")
    dt_out = traj.times[1] - traj.times[0]
    steps = np.rint(lags / dt_out).astype(int)
    if np.any(np.abs(steps * dt_out - lags) > 1e-9 * np.maximum(1.0, lags)):
        raise ValueError("lags must be integer multiples of the sampling interval")
    span = traj.times[-1] - traj.times[0]
    if np.any(lags > 0.1 * span * (1.0 + 1e-12)):
        raise ValueError("lags must not exceed a tenth of the trajectory span")

    sx = np.empty(lags.size)
    sv = np.empty(lags.size)
    for i, m in enumerate(steps):
        dxs = traj.positions[m:] - traj.positions[:-m]
        dvs = traj.velocities[m:] - traj.velocities[:-m]
        sx[i] = float(np.mean(np.sum(dxs * dxs, axis=1) ** 2))
        sv[i] = float(np.mean(np.sum(dvs * dvs, axis=1) ** 2))

    def _slope(series):
        if np.any(series <= 0.0):
            return float("nan")
        return float(np.polyfit(np.log(lags), np.log(series), 1)[0])

    return StructureFunction(lags=lags, sx4=sx, sv4=sv,
                             slope_x=_slope(sx), slope_v=_slope(sv))


def time_averaged_measure(traj: Trajectory, observable: str = "r",
                          t_grid=None) -> np.ndarray:
    """Samples of an observable along the path, the empirical measure.

    observable: "x" or "v" (components; squeezed in 1-d), "r" = |x|,
    or "phi" = U(x) + |v|^2/2 (requires an attached config).  t_grid
    selects the sampling times (nearest output samples); by default
    every output sample is used.
    """
    if t_grid is None:
        idx = np.arange(traj.times.size)
    else:
        t_grid = np.asarray(t_grid, dtype=np.float64)
        if t_grid.size == 0:
            raise ValueError("t_grid must be non-empty")
        idx = np.unique(np.searchsorted(traj.times, t_grid).clip(0, traj.times.size - 1))
    if observable == "x":
        out = traj.positions[idx]
    elif observable == "v":
        out = traj.velocities[idx]
    elif observable == "r":
        return _radii(traj)[idx]
    elif observable == "phi":
        if traj.config is None:
            raise ValueError("phi observable needs a trajectory with attached config")
        return np.asarray(energy_phi(traj.positions[idx], traj.velocities[idx],
                                     traj.config.potential))
    else:
        raise ValueError(f"unknown observable {observable!r}")
    return out[:, 0] if out.shape[1] == 1 else out


def ks_statistic(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between samples and an analytic CDF."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    n = s.size
    if n == 0:
        raise ValueError("need at least one sample")
    theo = np.asarray(cdf(s), dtype=np.float64)
    upper = np.arange(1, n + 1) / n - theo
    lower = theo - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def linear_trend_ci(times, values, n_blocks: int = 16,
                    confidence: float = 0.95) -> tuple[float, float, float]:
    """Slope of values vs times with a confidence interval.

    The series is averaged over n_blocks contiguous blocks before the
    least-squares fit, which absorbs short-range autocorrelation; the
    interval uses the Student-t quantile with n_blocks - 2 degrees of
    freedom.  Returns (slope, lo, hi).
    """
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if times.size != values.size or times.size < 2 * n_blocks:
        raise ValueError("series too short for the requested block count")
    usable = times.size - times.size % n_blocks
    tb = times[:usable].reshape(n_blocks, -1).mean(axis=1)
    vb = values[:usable].reshape(n_blocks, -1).mean(axis=1)
    design = np.column_stack([tb, np.ones_like(tb)])
    coef, residuals, _, _ = np.linalg.lstsq(design, vb, rcond=None)
    slope = float(coef[0])
    dof = n_blocks - 2
    rss = float(residuals[0]) if residuals.size else float(np.sum((vb - design @ coef) ** 2))
    se = np.sqrt(rss / dof / np.sum((tb - tb.mean()) ** 2))
    q = float(_student_t.ppf(0.5 + confidence / 2.0, dof))
    return slope, slope - q * se, slope + q * se


def write_radial_pdf_csv(pdf: RadialPdf, path) -> None:
    """CSV with header r_lo,r_hi,density."""
    with open(path, "w") as fh:
        fh.write("r_lo,r_hi,density\n")
        for lo, hi, d in zip(pdf.edges[:-1], pdf.edges[1:], pdf.density):
            fh.write(f"{float(lo)!r},{float(hi)!r},{float(d)!r}\n")


def write_moment_series_csv(series: MomentSeries, path) -> None:
    """CSV with header t,mean_phi,mean_phi_p."""
    with open(path, "w") as fh:
        fh.write("t,mean_phi,mean_phi_p\n")
        for t, a, b in zip(series.times, series.mean_phi, series.mean_phi_p):
            fh.write(f"{float(t)!r},{float(a)!r},{float(b)!r}\n")


def write_structure_csv(sf: StructureFunction, path) -> None:
    """CSV with header lag,sx4,sv4, preceded by a slope comment line."""
    with open(path, "w") as fh:
        fh.write(f"# slope_x={sf.slope_x!r}, slope_v={sf.slope_v!r}\n")
        fh.write("lag,sx4,sv4\n")
        for lag, a, b in zip(sf.lags, sf.sx4, sf.sv4):
            fh.write(f"{float(lag)!r},{float(a)!r},{float(b)!r}\n")
