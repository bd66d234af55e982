"""Euler-Maruyama integration of the walker equation with memory.

The memory force at step n is the trapezoidal approximation of

    T_n = int_{-infty}^{t_n} H(x_n - x(s)) K(t_n - s) ds

truncated to a window [t_n - T_w, t_n].  Evolved history inside the
window is held in a circular buffer at full step resolution; the part
of the integral reaching into s <= 0 is supplied by the initial past,
in closed form for zero/constant pasts and by a trapezoid over the
tabulated support otherwise.  Contributions beyond the window are
dropped; window_error_bound gives the rigorous envelope for what was
dropped.

The step update is explicit:

    x_{n+1} = x_n + v_n dt
    v_{n+1} = v_n + (dt/kappa) (-v_n - grad U(x_n) + alpha T_n)
                  + (sigma/kappa) sqrt(dt) xi_n,   xi_n ~ N(0, I).

Noise streams are counter-based (Philox) and splittable: trajectory i
of an ensemble draws from the child stream (seed, spawn_key=(i,)), so
results are independent of scheduling order.  In 2-d each step draws
the x component before the y component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .bessel import j1_scalar
from .model import Kernel, ModelParams, Potential, WaveForce

_TWO_PI = 2.0 * math.pi

# initial-past variant codes shared with the compiled kernels
_PAST_ZERO = 0
_PAST_CONSTANT = 1
_PAST_TABULATED = 2

_EXT_NONE = 0
_EXT_ZERO = 1
_EXT_CONSTANT = 2


class ConfigError(ValueError):
    """Invalid configuration or violated call precondition."""


class BlowUpError(RuntimeError):
    """Trajectory left the finite range; carries the first bad step index."""

    def __init__(self, step_index: int, time: float, member: int | None = None):
        self.step_index = step_index
        self.time = time
        self.member = member
        msg = f"non-finite state at step {step_index} (t = {time:g})"
        if member is not None:
            msg = f"ensemble member {member}: " + msg
        super().__init__(msg)


def trajectory_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Philox child stream for trajectory `index` of ensemble `seed`."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class InitialPast:
    """Prescribed path on s <= 0 feeding the memory integral.

    variant "zero" is the bouncing state x == 0; "constant" sits at a
    fixed point with zero velocity; "tabulated" (and "orbital", which is
    tabulated data sampled from a circular orbit) interpolates given
    samples linearly and continues beyond its support according to
    `extend`.  value_at(0) defines the simulation's initial state.
    """

    variant: str
    dim: int
    point: np.ndarray | None = None
    times: np.ndarray | None = None
    positions: np.ndarray | None = None
    velocities: np.ndarray | None = None
    extend: str = "zero"
    extend_point: np.ndarray | None = None

    @classmethod
    def zero(cls, dim: int = 2) -> "InitialPast":
        return cls(variant="zero", dim=dim)

    @classmethod
    def constant(cls, point) -> "InitialPast":
        point = np.atleast_1d(np.asarray(point, dtype=np.float64))
        if not np.all(np.isfinite(point)):
            raise ConfigError("constant past point must be finite")
        return cls(variant="constant", dim=point.shape[0], point=point)

    @classmethod
    def tabulated(cls, times, positions, velocities,
                  extend: str = "zero", extend_point=None,
                  variant: str = "tabulated") -> "InitialPast":
        times = np.asarray(times, dtype=np.float64)
        positions = np.asarray(positions, dtype=np.float64)
        velocities = np.asarray(velocities, dtype=np.float64)
        if positions.ndim == 1:
            positions = positions[:, None]
        if velocities.ndim == 1:
            velocities = velocities[:, None]
        if times.ndim != 1 or times.size < 1:
            raise ConfigError("tabulated past needs at least one sample")
        if abs(times[-1]) > 0.0:
            raise ConfigError("tabulated past must end exactly at s = 0")
        if times.size > 1 and np.any(np.diff(times) <= 0.0):
            raise ConfigError("tabulated past times must be strictly increasing")
        if positions.shape[0] != times.size or velocities.shape != positions.shape:
            raise ConfigError("tabulated past arrays disagree in shape")
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(velocities))):
            raise ConfigError("tabulated past samples must be finite")
        if extend not in ("zero", "constant", "none"):
            raise ConfigError(f"unknown past continuation {extend!r}")
        ep = None
        if extend == "constant":
            if extend_point is None:
                raise ConfigError("constant continuation requires extend_point")
            ep = np.atleast_1d(np.asarray(extend_point, dtype=np.float64))
        return cls(variant=variant, dim=positions.shape[1], times=times,
                   positions=positions, velocities=velocities,
                   extend=extend, extend_point=ep)

    def value_at(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        """Position and velocity of the past path at time s <= 0."""
        if s > 0.0:
            raise ValueError(f"past is defined for s <= 0, got s = {s}")
        if self.variant == "zero":
            return np.zeros(self.dim), np.zeros(self.dim)
        if self.variant == "constant":
            return self.point.copy(), np.zeros(self.dim)
        if s < self.times[0]:
            if self.extend == "zero":
                return np.zeros(self.dim), np.zeros(self.dim)
            if self.extend == "constant":
                return self.extend_point.copy(), np.zeros(self.dim)
            raise ValueError(f"past not defined before s = {self.times[0]:g}")
        x = np.array([np.interp(s, self.times, self.positions[:, d])
                      for d in range(self.dim)])
        v = np.array([np.interp(s, self.times, self.velocities[:, d])
                      for d in range(self.dim)])
        return x, v

    def _encode(self) -> tuple[int, np.ndarray, np.ndarray, np.ndarray, int, np.ndarray]:
        """Pack the past into plain arrays for the compiled kernels."""
        point = np.zeros(self.dim)
        tab_s = np.zeros(0)
        tab_x = np.zeros((0, self.dim))
        ext_kind = _EXT_NONE
        ext_point = np.zeros(self.dim)
        if self.variant == "zero":
            kind = _PAST_ZERO
        elif self.variant == "constant":
            kind = _PAST_CONSTANT
            point = np.ascontiguousarray(self.point, dtype=np.float64)
        else:
            kind = _PAST_TABULATED
            tab_s = np.ascontiguousarray(self.times, dtype=np.float64)
            tab_x = np.ascontiguousarray(self.positions, dtype=np.float64)
            if self.extend == "zero":
                ext_kind = _EXT_ZERO
            elif self.extend == "constant":
                ext_kind = _EXT_CONSTANT
                ext_point = np.ascontiguousarray(self.extend_point, dtype=np.float64)
        return kind, point, tab_s, tab_x, ext_kind, ext_point


def bridge_past(anchor_x, anchor_v, duration: float, dt: float) -> InitialPast:
    """Zero far past joined C1 to a prescribed state at s = 0.

    The join is a cubic Hermite ramp on [-duration, 0]: value and slope
    vanish at the far end and reach (anchor_x, anchor_v) exactly at
    s = 0.  This is the canonical way to couple a bouncing-state past
    against one that ends elsewhere: both runs then share the anchor
    that couple_simulate requires, while the memory they carry differs.
    """
    anchor_x = np.atleast_1d(np.asarray(anchor_x, dtype=np.float64))
    anchor_v = np.atleast_1d(np.asarray(anchor_v, dtype=np.float64))
    if anchor_x.shape != anchor_v.shape:
        raise ConfigError("bridge anchor position/velocity disagree in shape")
    if not duration > 0:
        raise ConfigError(f"bridge duration must be positive, got {duration}")
    if not dt > 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    n = max(2, round(duration / dt))
    span = n * dt
    s = np.linspace(-span, 0.0, n + 1)
    u = 1.0 + s / span  # ramp coordinate: 0 far end, 1 at the anchor
    h01 = u * u * (3.0 - 2.0 * u)
    h11 = u * u * (u - 1.0)
    dh01 = 6.0 * u * (1.0 - u)
    dh11 = u * (3.0 * u - 2.0)
    pos = h01[:, None] * anchor_x + (span * h11)[:, None] * anchor_v
    vel = (dh01 / span)[:, None] * anchor_x + dh11[:, None] * anchor_v
    return InitialPast.tabulated(s, pos, vel, extend="zero", variant="bridge")


class HistoryBuffer:
    """Circular store of the last window_steps + 1 positions.

    Slot assignment mirrors the compiled loop: the position of absolute
    step i lives at slot i mod (window_steps + 1), so entry times are
    t_n - j dt for lags j = 0 .. filled-1.
    """

    def __init__(self, window_steps: int, dt: float, dim: int):
        if window_steps < 1:
            raise ConfigError("window_steps must be at least 1")
        if not dt > 0:
            raise ConfigError("dt must be positive")
        self.window_steps = int(window_steps)
        self.dt = float(dt)
        self.dim = int(dim)
        self._buf = np.zeros((self.window_steps + 1, self.dim))
        self._pushed = 0

    @property
    def filled(self) -> int:
        return min(self._pushed, self.window_steps + 1)

    @property
    def newest_index(self) -> int:
        """Absolute step index of the newest entry (-1 when empty)."""
        return self._pushed - 1

    def push(self, x) -> None:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        if x.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {x.shape}")
        self._buf[self._pushed % (self.window_steps + 1)] = x
        self._pushed += 1

    def position_at_lag(self, lag: int) -> np.ndarray:
        if not 0 <= lag < self.filled:
            raise IndexError(f"lag {lag} outside filled range {self.filled}")
        slot = (self.newest_index - lag) % (self.window_steps + 1)
        return self._buf[slot].copy()

    def ordered(self) -> np.ndarray:
        """Filled entries oldest to newest, shape (filled, dim)."""
        n = self.filled
        out = np.empty((n, self.dim))
        for j in range(n):
            out[n - 1 - j] = self.position_at_lag(j)
        return out


def _default_window(tail_tol: float, decay_delta: float) -> float:
    # smallest whole number of time units whose kernel tail is below tail_tol
    return float(math.ceil(-math.log(tail_tol) / decay_delta))


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one simulation run."""

    params: ModelParams
    dt: float
    t_max: float
    seed: int
    kernel: Kernel = field(default_factory=Kernel)
    force: WaveForce = field(default_factory=WaveForce)
    potential: Potential | None = None
    initial_past: InitialPast | None = None
    t_w: float | None = None
    tail_tol: float = 1e-8
    stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"sim.dt must be positive, got {self.dt}")
        if not self.t_max > 0:
            raise ConfigError(f"sim.t_max must be positive, got {self.t_max}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ConfigError(f"sim.stride must be a positive integer, got {self.stride}")
        if not 0.0 < self.tail_tol < 1.0:
            raise ConfigError(f"sim.tail_tol must lie in (0, 1), got {self.tail_tol}")
        n = round(self.t_max / self.dt)
        if n < 1 or abs(n * self.dt - self.t_max) > 1e-9 * max(1.0, self.t_max):
            raise ConfigError(
                f"sim.t_max = {self.t_max} is not a whole number of steps of dt = {self.dt}")
        if n % int(self.stride) != 0:
            raise ConfigError(
                f"step count {n} is not a multiple of sim.stride = {self.stride}")
        if self.potential is None:
            object.__setattr__(self, "potential", Potential(spring_k=self.params.spring_k))
        elif self.potential.spring_k != self.params.spring_k:
            raise ConfigError("potential.spring_k disagrees with model.spring_k")
        if self.initial_past is None:
            object.__setattr__(self, "initial_past", InitialPast.zero(self.params.dim))
        elif self.initial_past.dim != self.params.dim:
            raise ConfigError(
                f"initial past dimension {self.initial_past.dim} != model dim {self.params.dim}")
        if self.t_w is None:
            object.__setattr__(self, "t_w", _default_window(self.tail_tol, self.kernel.decay_delta))
        guard = 10.0 / self.kernel.decay_delta
        if self.t_w < guard - 1e-12:
            raise ConfigError(
                f"truncation window T_w = {self.t_w:g} below the guard 10/delta = {guard:g}")
        past = self.initial_past
        if past.times is not None and past.extend == "none" \
                and -past.times[0] < self.t_w - 1e-9:
            raise ConfigError(
                f"tabulated past covers only {-past.times[0]:g} time units, "
                f"shorter than T_w = {self.t_w:g}, and declares no continuation")

    @property
    def n_steps(self) -> int:
        return round(self.t_max / self.dt)

    @property
    def window_steps(self) -> int:
        return int(math.ceil(self.t_w / self.dt - 1e-9))

    @property
    def n_output(self) -> int:
        return self.n_steps // int(self.stride) + 1


@dataclass(eq=False)
class Trajectory:
    """Sampled output of a run; positions/velocities have shape (n, dim)."""

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    config: SimConfig | None = None
    h_sup_observed: float = 0.0

    def __post_init__(self):
        if not (np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.velocities))):
            raise ValueError("trajectory samples must all be finite")

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def truncation_bound(self) -> float:
        """Realized envelope for the dropped memory tail of this run."""
        if self.config is None:
            raise ValueError("trajectory has no attached config")
        return window_error_bound(self.config.t_w, self.h_sup_observed, self.config.kernel)

    def write_csv(self, path) -> None:
        write_trajectory_csv(self, path)


def window_error_bound(t_w: float, h_sup: float, kernel: Kernel | None = None) -> float:
    """Bound on the dropped memory-force mass: h_sup * int_{T_w}^inf K."""
    kernel = kernel or Kernel()
    return float(h_sup * kernel.tail_mass(t_w))


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """CSV with header t,x,vx (1-d) or t,x,y,vx,vy (2-d), full precision."""
    header = "t,x,vx" if traj.dim == 1 else "t,x,y,vx,vy"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(traj.times.shape[0]):
            cells = [repr(float(traj.times[i]))]
            cells += [repr(float(c)) for c in traj.positions[i]]
            cells += [repr(float(c)) for c in traj.velocities[i]]
            fh.write(",".join(cells) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    with open(path) as fh:
        header = fh.readline().strip()
    if header == "t,x,vx":
        dim = 1
    elif header == "t,x,y,vx,vy":
        dim = 2
    else:
        raise ValueError(f"unrecognized trajectory header {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 1 + 2 * dim:
        raise ValueError("trajectory CSV column count disagrees with header")
    return Trajectory(times=data[:, 0],
                      positions=data[:, 1:1 + dim],
                      velocities=data[:, 1 + dim:])


@njit(cache=True, nogil=True)
def _mem_force(buf, cap, n, w_steps, dim, dt, kw, delta, amp, t_w,
               past_kind, past_point, tab_s, tab_x, ext_kind, ext_point,
               x, out):
    """Trapezoidal memory integral T_n at step n; returns max |H| seen.

    kw[j] = K(j dt) * dt are precomputed kernel weights.  The history
    part covers lags 1..min(n, w_steps) (the lag-0 term vanishes since
    H(0) = 0); the initial past supplies the rest while t < t_w.
    """
    t = n * dt
    for d in range(dim):
        out[d] = 0.0
    hmax = 0.0

    m = n if n < w_steps else w_steps
    for j in range(1, m + 1):
        slot = (n - j) % cap
        w = kw[j]
        if j == m:
            w *= 0.5
        if dim == 1:
            hval = j1_scalar(x[0] - buf[slot, 0])
            habs = abs(hval)
            out[0] += w * hval
        else:
            dx = x[0] - buf[slot, 0]
            dy = x[1] - buf[slot, 1]
            r = math.sqrt(dx * dx + dy * dy)
            if r > 0.0:
                hval = j1_scalar(_TWO_PI * r)
                habs = abs(hval)
                s = hval / r
                out[0] += w * s * dx
                out[1] += w * s * dy
            else:
                habs = 0.0
        if habs > hmax:
            hmax = habs

    if t < t_w:
        if past_kind == 0 or past_kind == 1:
            # exact closed form: H(x_n - c) * int_{-infty}^0 K(t - s) ds
            tail = amp / delta * math.exp(-delta * t)
            if dim == 1:
                hval = j1_scalar(x[0] - past_point[0])
                if abs(hval) > hmax:
                    hmax = abs(hval)
                out[0] += tail * hval
            else:
                dx = x[0] - past_point[0]
                dy = x[1] - past_point[1]
                r = math.sqrt(dx * dx + dy * dy)
                if r > 0.0:
                    hval = j1_scalar(_TWO_PI * r)
                    if abs(hval) > hmax:
                        hmax = abs(hval)
                    s = hval / r
                    out[0] += tail * s * dx
                    out[1] += tail * s * dy
        else:
            s_lo = t - t_w
            m_tab = tab_s.shape[0]
            k0 = 0
            while k0 < m_tab and tab_s[k0] < s_lo:
                k0 += 1
            for k in range(k0, m_tab):
                # trapezoid weight on the clipped tabulated grid
                if m_tab - k0 < 2:
                    break
                if k == k0:
                    w = 0.5 * (tab_s[k + 1] - tab_s[k])
                elif k == m_tab - 1:
                    w = 0.5 * (tab_s[k] - tab_s[k - 1])
                else:
                    w = 0.5 * (tab_s[k + 1] - tab_s[k - 1])
                kv = amp * math.exp(-delta * (t - tab_s[k]))
                if dim == 1:
                    hval = j1_scalar(x[0] - tab_x[k, 0])
                    if abs(hval) > hmax:
                        hmax = abs(hval)
                    out[0] += w * kv * hval
                else:
                    dx = x[0] - tab_x[k, 0]
                    dy = x[1] - tab_x[k, 1]
                    r = math.sqrt(dx * dx + dy * dy)
                    if r > 0.0:
                        hval = j1_scalar(_TWO_PI * r)
                        if abs(hval) > hmax:
                            hmax = abs(hval)
                        s = hval / r
                        out[0] += w * kv * s * dx
                        out[1] += w * kv * s * dy
            if ext_kind != 0 and m_tab > 0 and t - tab_s[0] < t_w:
                tail = amp / delta * math.exp(-delta * (t - tab_s[0]))
                if dim == 1:
                    hval = j1_scalar(x[0] - ext_point[0])
                    if abs(hval) > hmax:
                        hmax = abs(hval)
                    out[0] += tail * hval
                else:
                    dx = x[0] - ext_point[0]
                    dy = x[1] - ext_point[1]
                    r = math.sqrt(dx * dx + dy * dy)
                    if r > 0.0:
                        hval = j1_scalar(_TWO_PI * r)
                        if abs(hval) > hmax:
                            hmax = abs(hval)
                        s = hval / r
                        out[0] += tail * s * dx
                        out[1] += tail * s * dy
    return hmax


@njit(cache=True, nogil=True)
def _run_loop(x, v, n_steps, dt, kappa, alpha, sigma, spring_k,
              kw, delta, amp, t_w, w_steps, dim,
              past_kind, past_point, tab_s, tab_x, ext_kind, ext_point,
              noise, stride, out_t, out_x, out_v):
    """Integrate n_steps; returns (first bad step or 0, observed sup |H|)."""
    cap = w_steps + 1
    buf = np.zeros((cap, dim))
    for d in range(dim):
        buf[0, d] = x[d]
    force = np.zeros(dim)
    dtk = dt / kappa
    sig = sigma / kappa
    sqrt_dt = math.sqrt(dt)
    hmax = 0.0

    out_t[0] = 0.0
    for d in range(dim):
        out_x[0, d] = x[d]
        out_v[0, d] = v[d]
    row = 1

    for n in range(n_steps):
        if alpha != 0.0:
            hm = _mem_force(buf, cap, n, w_steps, dim, dt, kw, delta, amp, t_w,
                            past_kind, past_point, tab_s, tab_x, ext_kind, ext_point,
                            x, force)
            if hm > hmax:
                hmax = hm
        else:
            for d in range(dim):
                force[d] = 0.0
        bad = False
        for d in range(dim):
            v_new = v[d] + (-v[d] - spring_k * x[d] + alpha * force[d]) * dtk \
                + sig * sqrt_dt * noise[n, d]
            x_new = x[d] + v[d] * dt
            if not (math.isfinite(x_new) and math.isfinite(v_new)):
                bad = True
            x[d] = x_new
            v[d] = v_new
        if bad:
            return n + 1, hmax
        slot = (n + 1) % cap
        for d in range(dim):
            buf[slot, d] = x[d]
        if (n + 1) % stride == 0:
            out_t[row] = (n + 1) * dt
            for d in range(dim):
                out_x[row, d] = x[d]
                out_v[row, d] = v[d]
            row += 1
    return 0, hmax


def _kernel_weights(config: SimConfig) -> np.ndarray:
    j = np.arange(config.window_steps + 1, dtype=np.float64)
    return config.kernel.amplitude * np.exp(-config.kernel.decay_delta * j * config.dt) * config.dt


def memory_force(step_index: int, history: HistoryBuffer, past: InitialPast,
                 kernel: Kernel | None = None, force: WaveForce | None = None,
                 t_w: float | None = None) -> np.ndarray:
    """Memory integral T_n for the state held in `history` at step n.

    The newest buffer entry must be the current position x_n and the
    buffer's absolute step counter must agree with step_index.
    """
    kernel = kernel or Kernel()
    if force is not None and force.family != "bessel_j1_radial":
        raise ConfigError(f"unsupported force family {force.family!r}")
    if history.filled == 0:
        raise ConfigError("memory_force requires a non-empty history")
    if history.newest_index != step_index:
        raise ConfigError(
            f"history holds step {history.newest_index}, asked for step {step_index}")
    if past.dim != history.dim:
        raise ConfigError("past and history disagree in dimension")
    if t_w is None:
        t_w = _default_window(1e-8, kernel.decay_delta)
    if history.window_steps * history.dt < t_w - 1e-12:
        raise ConfigError(
            f"history window {history.window_steps * history.dt:g} shorter than T_w = {t_w:g}")

    dt = history.dt
    w_steps = history.window_steps
    j = np.arange(w_steps + 1, dtype=np.float64)
    kw = kernel.amplitude * np.exp(-kernel.decay_delta * j * dt) * dt
    kind, point, tab_s, tab_x, ext_kind, ext_point = past._encode()
    out = np.zeros(history.dim)
    x = history.position_at_lag(0)
    _mem_force(history._buf, w_steps + 1, step_index, w_steps, history.dim, dt,
               kw, kernel.decay_delta, kernel.amplitude, t_w,
               kind, point, tab_s, tab_x, ext_kind, ext_point, x, out)
    return out


def em_step(config: SimConfig, x, v, step_index: int, history: HistoryBuffer,
            noise_vec) -> tuple[np.ndarray, np.ndarray]:
    """One Euler-Maruyama update from step n to n + 1.

    Matches the compiled loop bit for bit: the position update uses the
    pre-update velocity, and the memory force is evaluated with x_n as
    the newest history entry.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    noise_vec = np.atleast_1d(np.asarray(noise_vec, dtype=np.float64))
    p = config.params
    if config.params.alpha != 0.0:
        force = memory_force(step_index, history, config.initial_past,
                             kernel=config.kernel, force=config.force, t_w=config.t_w)
    else:
        force = np.zeros(p.dim)
    dtk = config.dt / p.kappa
    sig = p.sigma / p.kappa
    sqrt_dt = math.sqrt(config.dt)
    v_new = v + (-v - p.spring_k * x + p.alpha * force) * dtk + sig * sqrt_dt * noise_vec
    x_new = x + v * config.dt
    if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(v_new))):
        raise BlowUpError(step_index + 1, (step_index + 1) * config.dt)
    return x_new, v_new


def simulate(config: SimConfig, noise: np.ndarray | None = None) -> Trajectory:
    """Run one trajectory; a pure function of (config, noise).

    When noise is omitted it is drawn from the Philox child stream
    (seed, 0), so identical configs reproduce identical trajectories.
    A supplied noise array must have shape (n_steps, dim).
    """
    p = config.params
    n_steps = config.n_steps
    if noise is None:
        rng = trajectory_rng(config.seed, 0)
        noise = rng.standard_normal((n_steps, p.dim))
    else:
        noise = np.ascontiguousarray(noise, dtype=np.float64)
        if noise.shape != (n_steps, p.dim):
            raise ConfigError(
                f"noise shape {noise.shape} != (n_steps, dim) = {(n_steps, p.dim)}")

    x0, v0 = config.initial_past.value_at(0.0)
    x = np.ascontiguousarray(x0, dtype=np.float64)
    v = np.ascontiguousarray(v0, dtype=np.float64)
    kind, point, tab_s, tab_x, ext_kind, ext_point = config.initial_past._encode()
    kw = _kernel_weights(config)

    n_out = config.n_output
    out_t = np.empty(n_out)
    out_x = np.empty((n_out, p.dim))
    out_v = np.empty((n_out, p.dim))
    status, hmax = _run_loop(
        x, v, n_steps, config.dt, p.kappa, p.alpha, p.sigma, p.spring_k,
        kw, config.kernel.decay_delta, config.kernel.amplitude,
        config.t_w, config.window_steps, p.dim,
        kind, point, tab_s, tab_x, ext_kind, ext_point,
        noise, int(config.stride), out_t, out_x, out_v)
    if status > 0:
        raise BlowUpError(status, status * config.dt)
    return Trajectory(times=out_t, positions=out_x, velocities=out_v,
                      config=config, h_sup_observed=hmax)


def couple_simulate(config: SimConfig, past_a: InitialPast, past_b: InitialPast
                    ) -> tuple[Trajectory, Trajectory]:
    """Two runs driven by the identical noise path, differing only in past.

    Both pasts must agree exactly at s = 0 (position and velocity), the
    shared anchor of the coupling construction.
    """
    xa, va = past_a.value_at(0.0)
    xb, vb = past_b.value_at(0.0)
    if not (np.array_equal(xa, xb) and np.array_equal(va, vb)):
        raise ConfigError(
            f"pasts must share the anchor at s = 0: got x(0) {xa} vs {xb}, v(0) {va} vs {vb}")
    if past_a.dim != config.params.dim or past_b.dim != config.params.dim:
        raise ConfigError("past dimension disagrees with the model")
    rng = trajectory_rng(config.seed, 0)
    noise = rng.standard_normal((config.n_steps, config.params.dim))
    traj_a = simulate(replace(config, initial_past=past_a), noise=noise)
    traj_b = simulate(replace(config, initial_past=past_b), noise=noise)
    return traj_a, traj_b
