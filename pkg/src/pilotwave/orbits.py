"""Deterministic circular-orbit states of the noise-free walker.

A walker circling at radius r0 and angular frequency omega balances the
trap, the drag and the self-excited wave force.  Substituting the
circle into the equation of motion and resolving along the radial and
tangential directions gives two scalar residuals,

    F1 = kappa r0 omega^2 - k r0
         + alpha I[J1(4 pi r0 sin(wz/2)) sin(wz/2)],
    F2 = r0 omega - alpha I[J1(4 pi r0 sin(wz/2)) cos(wz/2)],

where I[f] = int_0^infty f(z) K(z) dz.  Both vanish exactly on an
orbital state.  The integrals carry the kernel's exponential weight, so
Gauss-Laguerre quadrature is the natural rule; node counts double from
64 until two successive refinements agree to 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .bessel import bessel_j1
from .integrator import InitialPast
from .model import Kernel, ModelParams

_FOUR_PI = 4.0 * math.pi


class QuadratureError(RuntimeError):
    """Quadrature failed to converge within the node-count budget."""


@dataclass(frozen=True)
class OrbitSolution:
    """One orbital fixed point; residual_norm is ||(F1, F2)||_2."""

    r0: float
    omega: float
    residual_norm: float
    quadrature_nodes: int


_NODE_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _laguerre_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Laguerre nodes/weights via the Golub-Welsch eigenproblem.

    The symmetric tridiagonal form stays stable into the thousands of
    nodes, where the library polynomial-recurrence routines overflow.
    """
    if n not in _NODE_CACHE:
        diag = 2.0 * np.arange(n) + 1.0
        off = np.arange(1.0, n)
        nodes, vecs = eigh_tridiagonal(diag, off)
        weights = vecs[0] ** 2  # total mass int_0^inf e^{-x} dx = 1
        _NODE_CACHE[n] = (nodes, weights)
    return _NODE_CACHE[n]


def _orbit_integrals(r0: float, omega: float, n: int, delta: float) -> tuple[float, float]:
    """The two wave integrals at n Gauss-Laguerre nodes.

    With K(z) = amp exp(-delta z) substitute u = delta z, leaving the
    unit weight exp(-u) and frequency omega/delta; the amp/delta
    prefactor is applied by the caller.
    """
    u, w = _laguerre_nodes(n)
    half = 0.5 * omega / delta * u
    s = np.sin(half)
    j = bessel_j1(_FOUR_PI * r0 * s)
    i_sin = float(np.dot(w, j * s))
    i_cos = float(np.dot(w, j * np.cos(half)))
    return i_sin, i_cos


def orbit_residual(r0: float, omega: float, params: ModelParams,
                   kernel: Kernel | None = None,
                   quad_tol: float = 1e-12, n_start: int = 64,
                   n_max: int = 1024, return_nodes: bool = False):
    """Residual pair (F1, F2) of the orbital balance at (r0, omega).

    Quadrature is refined by doubling the node count until successive
    values of both integrals agree to quad_tol; exceeding n_max raises
    QuadratureError.
    """
    kernel = kernel or Kernel()
    delta = kernel.decay_delta
    pref = kernel.amplitude / delta
    n = n_start
    prev = _orbit_integrals(r0, omega, n, delta)
    while True:
        n *= 2
        if n > n_max:
            raise QuadratureError(
                f"orbit integrals did not converge to {quad_tol:g} "
                f"within {n_max} nodes at (r0, omega) = ({r0:g}, {omega:g})")
        cur = _orbit_integrals(r0, omega, n, delta)
        if abs(cur[0] - prev[0]) < quad_tol and abs(cur[1] - prev[1]) < quad_tol:
            break
        prev = cur
    i_sin, i_cos = cur
    f1 = params.kappa * r0 * omega**2 - params.spring_k * r0 + params.alpha * pref * i_sin
    f2 = r0 * omega - params.alpha * pref * i_cos
    if return_nodes:
        return f1, f2, n
    return f1, f2


def _residual_vec(point: np.ndarray, params: ModelParams, kernel: Kernel) -> np.ndarray:
    f1, f2 = orbit_residual(point[0], point[1], params, kernel)
    return np.array([f1, f2])


def _newton_polish(start: np.ndarray, params: ModelParams, kernel: Kernel,
                   tol: float, max_iter: int = 60) -> tuple[np.ndarray, float, int] | None:
    """Damped Newton iteration on (F1, F2); returns (point, |F|, nodes)."""
    fd = 1e-6
    point = start.copy()
    fval = _residual_vec(point, params, kernel)
    norm = float(np.linalg.norm(fval))
    for _ in range(max_iter):
        if norm <= tol:
            _, _, nodes = orbit_residual(point[0], point[1], params, kernel, return_nodes=True)
            return point, norm, nodes
        jac = np.empty((2, 2))
        for col in range(2):
            bump = np.zeros(2)
            bump[col] = fd
            jac[:, col] = (_residual_vec(point + bump, params, kernel)
                           - _residual_vec(point - bump, params, kernel)) / (2.0 * fd)
        try:
            step = np.linalg.solve(jac, -fval)
        except np.linalg.LinAlgError:
            return None
        scale = 1.0
        for _ in range(10):  # backtrack until the residual actually drops
            cand = point + scale * step
            if cand[0] > 0.0 and cand[1] > 0.0:
                cand_f = _residual_vec(cand, params, kernel)
                cand_norm = float(np.linalg.norm(cand_f))
                if cand_norm < norm:
                    point, fval, norm = cand, cand_f, cand_norm
                    break
            scale *= 0.5
        else:
            return None
    return None


def solve_orbit(params: ModelParams, kernel: Kernel | None = None,
                r_range: tuple[float, float] = (0.05, 3.0),
                omega_range: tuple[float, float] = (0.05, 3.0),
                grid_points: int = 48,
                residual_tol: float = 1e-11) -> list[OrbitSolution]:
    """All orbital states inside the scan box, sorted by radius.

    The residual pair is evaluated on a coarse grid; every plaquette on
    which both components change sign seeds a damped Newton iteration.
    Converged points are deduplicated to 1e-6 and only the canonical
    omega > 0 branch is reported (the omega < 0 mirror is implied).
    An empty list is a valid outcome; alpha = 0 has no orbital states
    (nothing balances the drag torque r0 omega).
    """
    kernel = kernel or Kernel()
    if params.alpha == 0.0:
        return []

    rs = np.linspace(r_range[0], r_range[1], grid_points)
    ws = np.linspace(omega_range[0], omega_range[1], grid_points)
    f1 = np.full((grid_points, grid_points), np.nan)
    f2 = np.full((grid_points, grid_points), np.nan)
    for i, r in enumerate(rs):
        for j, w in enumerate(ws):
            try:
                f1[i, j], f2[i, j] = orbit_residual(r, w, params, kernel)
            except QuadratureError:
                continue  # unresolvable corner of the scan; no candidate here

    solutions: list[OrbitSolution] = []
    for i in range(grid_points - 1):
        for j in range(grid_points - 1):
            c1 = f1[i:i + 2, j:j + 2]
            c2 = f2[i:i + 2, j:j + 2]
            if np.any(np.isnan(c1)) or np.any(np.isnan(c2)):
                continue
            if c1.min() > 0 or c1.max() < 0 or c2.min() > 0 or c2.max() < 0:
                continue
            start = np.array([0.5 * (rs[i] + rs[i + 1]), 0.5 * (ws[j] + ws[j + 1])])
            try:
                polished = _newton_polish(start, params, kernel, residual_tol)
            except QuadratureError:
                continue
            if polished is None:
                continue
            point, norm, nodes = polished
            r0, omega = float(point[0]), float(point[1])
            if not (r_range[0] - 1e-9 <= r0 <= r_range[1] + 1e-9):
                continue
            if not (omega_range[0] - 1e-9 <= omega <= omega_range[1] + 1e-9):
                continue
            dup = False
            for k, sol in enumerate(solutions):
                if abs(sol.r0 - r0) <= 1e-6 and abs(sol.omega - omega) <= 1e-6:
                    dup = True
                    if norm < sol.residual_norm:
                        solutions[k] = OrbitSolution(r0, omega, norm, nodes)
                    break
            if not dup:
                solutions.append(OrbitSolution(r0, omega, norm, nodes))
    solutions.sort(key=lambda s: s.r0)
    return solutions


def orbital_past(solution: OrbitSolution, duration: float, dt: float) -> InitialPast:
    """Tabulated past sampling the circular orbit on [-duration, 0].

    x(s) = r0 (cos omega s, sin omega s), v(s) = r0 omega (-sin, cos);
    2-d only.  The duration must cover the truncation window of the run
    that consumes it, since the circle is not continued analytically.
    """
    if duration <= 0 or dt <= 0:
        raise ValueError("duration and dt must be positive")
    n = int(math.ceil(duration / dt - 1e-9))
    s = (np.arange(n + 1) - n) * dt
    s[-1] = 0.0
    c, sn = np.cos(solution.omega * s), np.sin(solution.omega * s)
    pos = solution.r0 * np.column_stack([c, sn])
    vel = solution.r0 * solution.omega * np.column_stack([-sn, c])
    return InitialPast.tabulated(s, pos, vel, extend="none", variant="orbital")
