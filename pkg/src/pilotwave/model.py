"""Model definition: parameters, kernel, wave force, potential, energies.

The walker obeys

    dx = v dt,
    kappa dv = (-v - grad U(x)) dt
               + alpha * [int_{-infty}^t H(x(t) - x(s)) K(t - s) ds] dt
               + sigma dW,

with exponential kernel K, a J1-shaped wave force H and a harmonic trap
U.  This module holds the parameter containers, the energy functionals
used by the moment diagnostics, the kernel-weighted path norms, and a
numerical verifier for the structural assumptions (kernel decay, force
growth, potential growth/coercivity, perturbed-energy equivalence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_j1

_KERNEL_FAMILIES = ("exponential",)
_FORCE_FAMILIES = ("bessel_j1_radial",)
_POTENTIAL_FAMILIES = ("harmonic",)


def _space_sq(a):
    """Squared Euclidean length over the trailing space axis.

    Scalars stay scalars; arrays are interpreted as (..., dim), so 1-d
    trajectories must be passed with an explicit trailing axis (n, 1).
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 0:
        return a * a
    return np.sum(a * a, axis=-1)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the walker equation."""

    kappa: float = 0.42
    alpha: float = 4.47
    sigma: float = 0.08
    spring_k: float = 0.35
    dim: int = 2

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.spring_k < 0:
            raise ValueError(f"spring_k must be non-negative, got {self.spring_k}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")


@dataclass(frozen=True)
class Kernel:
    """Memory kernel K(t) = amplitude * exp(-decay_delta * t), t >= 0."""

    family: str = "exponential"
    decay_delta: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.family not in _KERNEL_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.decay_delta > 0:
            raise ValueError(f"decay_delta must be positive, got {self.decay_delta}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")

    def value(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < 0.0):
            raise ValueError("kernel is defined for t >= 0")
        return self.amplitude * np.exp(-self.decay_delta * t)

    def derivative(self, t):
        return -self.decay_delta * self.value(t)

    def tail_mass(self, t):
        """int_t^infty K(u) du, closed form for the exponential family."""
        return self.amplitude / self.decay_delta * np.exp(-self.decay_delta * np.asarray(t, dtype=np.float64))

    @property
    def total_mass(self) -> float:
        return self.amplitude / self.decay_delta


@dataclass(frozen=True)
class WaveForce:
    """Radial J1 wave force.

    In 1-d, H(d) = J1(d).  In 2-d, H(d) = J1(2 pi |d|) d / |d| with the
    removable singularity at d = 0 evaluated as 0.  growth_aH and
    growth_p1 are the constants of the assumed growth bound
    max(|H|, |H'|) <= a_H (|x|^{p1} + 1); for J1 the profile is globally
    bounded, so p1 = 0.
    """

    family: str = "bessel_j1_radial"
    growth_aH: float = 1.0
    growth_p1: float = 0.0

    def __post_init__(self):
        if self.family not in _FORCE_FAMILIES:
            raise ValueError(f"unknown force family {self.family!r}")
        if not self.growth_aH > 0:
            raise ValueError(f"growth_aH must be positive, got {self.growth_aH}")
        if self.growth_p1 < 0:
            raise ValueError(f"growth_p1 must be non-negative, got {self.growth_p1}")

    def profile(self, r):
        """Scalar profile: J1(r) in 1-d units (argument already scaled)."""
        return bessel_j1(r)

    def evaluate(self, d, dim: int):
        """Force vector for displacement d; d has shape (dim,) or (n, dim)."""
        d = np.asarray(d, dtype=np.float64)
        if dim == 1:
            return bessel_j1(d)
        r = np.sqrt(_space_sq(d))
        r_safe = np.where(r > 0.0, r, 1.0)
        scale = np.where(r > 0.0, bessel_j1(2.0 * np.pi * r) / r_safe, 0.0)
        return d * np.expand_dims(scale, -1) if d.ndim > 1 else d * scale


@dataclass(frozen=True)
class VerifierConstants:
    """Constants instantiating the potential growth assumptions.

    a3 defaults to spring_k / 2, which makes the domination bound exact
    for the harmonic trap; eps1 fixes the exponent 2*max(1, p1 + eps1).
    """

    a0: float = 1.0
    n0: float = 1.0
    a1: float = 1.0
    a2: float = 1.0
    a3: float | None = None
    eps1: float = 1.0


@dataclass(frozen=True)
class Potential:
    """Confining potential U(x) = spring_k |x|^2 / 2."""

    family: str = "harmonic"
    spring_k: float = 0.35
    constants: VerifierConstants = field(default_factory=VerifierConstants)

    def __post_init__(self):
        if self.family not in _POTENTIAL_FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.spring_k < 0:
            raise ValueError(f"spring_k must be non-negative, got {self.spring_k}")

    def value(self, x):
        return 0.5 * self.spring_k * _space_sq(x)

    def grad(self, x):
        return self.spring_k * np.asarray(x, dtype=np.float64)


def energy_phi(x, v, potential: Potential):
    """Energy functional Phi(x, v) = U(x) + |v|^2 / 2."""
    return potential.value(x) + 0.5 * _space_sq(v)


def perturbed_energy(x, v, lam: float, potential: Potential):
    """Phi(x, v) + lam * <x, v>; lam must lie in (0, 1)."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"perturbation weight must lie in (0, 1), got {lam}")
    x_arr = np.asarray(x, dtype=np.float64)
    v_arr = np.asarray(v, dtype=np.float64)
    if x_arr.ndim == 0:
        cross = x_arr * v_arr
    else:
        cross = np.sum(x_arr * v_arr, axis=-1)
    return energy_phi(x, v, potential) + lam * cross


def weighted_path_norm(times, positions, q: float, kernel: Kernel,
                       tail: str = "zero", tail_point=None) -> float:
    """Kernel-weighted past norm int_{-infty}^0 |x(s)|^q K(-s) ds.

    The tabulated part (times ascending in [-T, 0], positions (m,) or
    (m, dim)) is integrated by the trapezoid rule; the mass beyond -T is
    added in closed form according to the declared continuation: "zero"
    (contributes nothing for q > 0), or "constant" with tail_point c,
    contributing |c|^q * int_T^infty K.
    """
    if q < 0:
        raise ValueError(f"exponent q must be non-negative, got {q}")
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if np.any(times > 0.0) or np.any(np.diff(times) <= 0.0):
        raise ValueError("times must be strictly increasing and end at s <= 0")
    positions = np.asarray(positions, dtype=np.float64)
    radii = np.sqrt(_space_sq(positions)) if positions.ndim > 1 else np.abs(positions)
    if radii.shape[0] != times.shape[0]:
        raise ValueError("times and positions disagree in length")

    integrand = radii**q * kernel.value(-times)
    total = float(np.trapezoid(integrand, times)) if times.size > 1 else 0.0

    if tail == "zero":
        if q == 0.0:  # |0|^0 = 1, the tail still carries full kernel mass
            total += float(kernel.tail_mass(-times[0]))
    elif tail == "constant":
        if tail_point is None:
            raise ValueError("constant tail requires tail_point")
        r = float(np.sqrt(_space_sq(tail_point)))
        total += r**q * float(kernel.tail_mass(-times[0]))
    else:
        raise ValueError(f"unknown tail continuation {tail!r}")
    return total


def growth_seminorm(times, positions, velocities, rho: float) -> float:
    """sup_n (|x_n| + |v_n|) / (1 + |t_n|^rho) over the sampled path."""
    if rho <= 0:
        raise ValueError(f"growth exponent rho must be positive, got {rho}")
    times = np.asarray(times, dtype=np.float64)
    positions = np.asarray(positions, dtype=np.float64)
    velocities = np.asarray(velocities, dtype=np.float64)
    size = np.sqrt(_space_sq(positions)) + np.sqrt(_space_sq(velocities))
    return float(np.max(size / (1.0 + np.abs(times) ** rho)))


@dataclass(frozen=True)
class GridSpec:
    """Sampling grids for the assumption verifier."""

    t_max: float = 50.0
    t_points: int = 512
    x_max: float = 20.0
    x_points: int = 2048
    xv_max: float = 10.0
    xv_points: int = 101
    lambda_max_exponent: int = 20


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    margin: float


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the structural-assumption checks.

    Margins are the worst (smallest) slack observed on the grid; a
    non-negative margin means the inequality held everywhere sampled.
    Failures are reported here, never raised.
    """

    kernel_ok: CheckResult
    h_growth_ok: CheckResult
    u_growth_ok: CheckResult
    u_coercive_ok: CheckResult
    u_dominates_ok: CheckResult
    lambda_found: float | None
    lambda_margin: float
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        checks = (self.kernel_ok, self.h_growth_ok, self.u_growth_ok,
                  self.u_coercive_ok, self.u_dominates_ok)
        return all(c.ok for c in checks) and self.lambda_found is not None

    def lines(self) -> list[str]:
        out = []
        for name, res in (
            ("kernel decay", self.kernel_ok),
            ("force growth", self.h_growth_ok),
            ("potential growth", self.u_growth_ok),
            ("potential coercivity", self.u_coercive_ok),
            ("potential domination", self.u_dominates_ok),
        ):
            out.append(f"{'ok  ' if res.ok else 'FAIL'} {name:22s} margin={res.margin:.6g}")
        if self.lambda_found is not None:
            out.append(f"ok   perturbed energy       lambda={self.lambda_found:g} "
                       f"ratio>={self.lambda_margin:.6g}")
        else:
            out.append("FAIL perturbed energy       no workable lambda in 2^-1..2^-20")
        for note in self.notes:
            out.append(f"note {note}")
        return out


def verify_assumptions(params: ModelParams,
                       kernel: Kernel | None = None,
                       force: WaveForce | None = None,
                       potential: Potential | None = None,
                       grid: GridSpec | None = None,
                       shift_potential: bool = True) -> AssumptionReport:
    """Check the structural assumptions numerically on sampling grids.

    The analysis requires U to take values in [1, infty) while the
    dynamics uses the bare harmonic trap, so by default the checks run
    against U + 1 and a note records the shift.  With shift_potential
    False the bare potential is checked and the domination flag fails
    at the origin (U(0) = 0 < 1).
    """
    kernel = kernel or Kernel()
    force = force or WaveForce()
    potential = potential or Potential(spring_k=params.spring_k)
    grid = grid or GridSpec()
    notes: list[str] = []

    # kernel decay K'(t) <= -delta K(t); exponential family holds with equality
    ts = np.linspace(0.0, grid.t_max, grid.t_points)
    kernel_margin = float(np.min(-kernel.decay_delta * kernel.value(ts) - kernel.derivative(ts)))
    kernel_res = CheckResult(kernel_margin >= -1e-12, kernel_margin)

    # force growth max(|H|, |H'|) <= a_H (|x|^{p1} + 1) on the scalar profile
    xs = np.linspace(-grid.x_max, grid.x_max, grid.x_points)
    h = force.profile(xs)
    fd = 1e-5
    hp = (force.profile(xs + fd) - force.profile(xs - fd)) / (2.0 * fd)
    bound = force.growth_aH * (np.abs(xs) ** force.growth_p1 + 1.0)
    h_margin = float(np.min(bound - np.maximum(np.abs(h), np.abs(hp))))
    h_res = CheckResult(h_margin >= -1e-12, h_margin)

    cst = potential.constants
    a3 = cst.a3 if cst.a3 is not None else potential.spring_k / 2.0
    shift = 1.0 if shift_potential else 0.0
    if shift_potential:
        notes.append("potential checked as U + 1 to meet the range requirement; "
                     "dynamics uses the bare harmonic trap")
    u = potential.value(xs[:, None]) + shift
    up = potential.grad(xs)

    # |U'| <= a0 (U^{n0} + 1)
    ug_margin = float(np.min(cst.a0 * (u**cst.n0 + 1.0) - np.abs(up)))
    ug_res = CheckResult(ug_margin >= -1e-12, ug_margin)

    # x U'(x) >= a1 U(x) - a2
    uc_margin = float(np.min(xs * up - (cst.a1 * u - cst.a2)))
    uc_res = CheckResult(uc_margin >= -1e-12, uc_margin)

    # U >= a3 |x|^{2 max(1, p1+eps1)} together with the range floor U >= 1
    exponent = 2.0 * max(1.0, force.growth_p1 + cst.eps1)
    floor = np.maximum(a3 * np.abs(xs) ** exponent, 1.0)
    ud_margin = float(np.min(u - floor))
    ud_res = CheckResult(ud_margin >= -1e-12, ud_margin)
    if not ud_res.ok and not shift_potential:
        notes.append("bare potential violates the range requirement U >= 1 near x = 0")

    # perturbed-energy equivalence: find lambda with Phi + lambda x v >= lambda1 Phi
    g = np.linspace(-grid.xv_max, grid.xv_max, grid.xv_points)
    xg, vg = np.meshgrid(g, g, indexing="ij")
    phi = 0.5 * potential.spring_k * xg**2 + shift + 0.5 * vg**2
    if not shift_potential:
        phi = np.maximum(phi, 1e-300)  # avoid 0/0 at the origin
    lambda_found = None
    lambda_margin = -math.inf
    for k in range(1, grid.lambda_max_exponent + 1):
        lam = 2.0**-k
        ratio = float(np.min((phi + lam * xg * vg) / phi))
        if ratio > 0.0:
            lambda_found, lambda_margin = lam, ratio
            break

    # a valid moment exponent p2 must exist in (2 p1, 2 max(1, p1+eps1))
    if not 2.0 * force.growth_p1 < exponent:
        notes.append("no admissible window for the past-norm exponent p2")

    return AssumptionReport(
        kernel_ok=kernel_res,
        h_growth_ok=h_res,
        u_growth_ok=ug_res,
        u_coercive_ok=uc_res,
        u_dominates_ok=ud_res,
        lambda_found=lambda_found,
        lambda_margin=lambda_margin,
        notes=tuple(notes),
    )
