"""Flat key-value run configuration.

The on-disk grammar is one `section.key = value` assignment per line,
with `#` comments and blank lines ignored, e.g.

    model.kappa = 0.42
    past.variant = zero

Unknown keys are rejected at parse time and every violation message
names the offending key.  serialize() emits every key explicitly, so
parse(serialize(cfg)) reproduces cfg exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .integrator import (ConfigError, InitialPast, SimConfig, bridge_past,
                         read_trajectory_csv)
from .model import Kernel, ModelParams, Potential, WaveForce

_AUTO = "auto"


def _past_keys(prefix: str) -> dict:
    return {
        f"{prefix}.variant": ("str", ("zero", "constant", "tabulated", "orbital", "bridge")),
        f"{prefix}.point.x": ("float", None),
        f"{prefix}.point.y": ("float", None),
        f"{prefix}.file": ("str", None),
        f"{prefix}.extend": ("str", ("zero", "constant", "none")),
        f"{prefix}.extend.x": ("float", None),
        f"{prefix}.extend.y": ("float", None),
        f"{prefix}.r0": ("float_or_auto", None),
        f"{prefix}.omega": ("float_or_auto", None),
        f"{prefix}.duration": ("float_or_auto", None),
    }


_SCHEMA: dict[str, tuple] = {
    "model.kappa": ("float", None),
    "model.alpha": ("float", None),
    "model.sigma": ("float", None),
    "model.spring_k": ("float", None),
    "model.dim": ("int", None),
    "model.kernel.delta": ("float", None),
    "model.kernel.amplitude": ("float", None),
    "model.force.family": ("str", ("bessel_j1_radial",)),
    "model.potential.family": ("str", ("harmonic",)),
    "sim.dt": ("float", None),
    "sim.t_max": ("float", None),
    "sim.seed": ("int", None),
    "sim.stride": ("int", None),
    "sim.tail_tol": ("float", None),
    "sim.t_w": ("float_or_auto", None),
    **_past_keys("past"),
    **_past_keys("couple"),
    "output.dir": ("str", None),
    "output.prefix": ("str", None),
    "pdf.bins": ("int", None),
    "pdf.burn_in": ("float", None),
    "pdf.r_max": ("float_or_auto", None),
    "moments.members": ("int", None),
    "moments.p": ("float", None),
}

_SECTION_ORDER = ("model", "sim", "past", "couple", "output", "pdf", "moments")


def _default_values() -> dict:
    vals = {
        "model.kappa": 0.42,
        "model.alpha": 4.47,
        "model.sigma": 0.08,
        "model.spring_k": 0.35,
        "model.dim": 2,
        "model.kernel.delta": 1.0,
        "model.kernel.amplitude": 1.0,
        "model.force.family": "bessel_j1_radial",
        "model.potential.family": "harmonic",
        "sim.dt": 0.015625,
        "sim.t_max": 10000.0,
        "sim.seed": 20260815,
        "sim.stride": 8,
        "sim.tail_tol": 1e-8,
        "sim.t_w": _AUTO,
        "output.dir": "out",
        "output.prefix": "walker",
        "pdf.bins": 200,
        "pdf.burn_in": 0.1,
        "pdf.r_max": _AUTO,
        "moments.members": 8,
        "moments.p": 2.0,
    }
    for prefix in ("past", "couple"):
        vals.update({
            f"{prefix}.variant": "zero",
            f"{prefix}.point.x": 0.0,
            f"{prefix}.point.y": 0.0,
            f"{prefix}.file": "",
            f"{prefix}.extend": "zero",
            f"{prefix}.extend.x": 0.0,
            f"{prefix}.extend.y": 0.0,
            f"{prefix}.r0": _AUTO,
            f"{prefix}.omega": _AUTO,
            f"{prefix}.duration": _AUTO,
        })
    return vals


def _parse_value(key: str, raw: str):
    kind, allowed = _SCHEMA[key]
    raw = raw.strip()
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if kind in ("float", "float_or_auto"):
        if kind == "float_or_auto" and raw == _AUTO:
            return _AUTO
        try:
            return float(raw)
        except ValueError:
            expect = "a number or 'auto'" if kind == "float_or_auto" else "a number"
            raise ConfigError(f"{key}: expected {expect}, got {raw!r}") from None
    if allowed is not None and raw not in allowed:
        raise ConfigError(f"{key}: must be one of {', '.join(allowed)}, got {raw!r}")
    return raw


@dataclass
class RunConfig:
    """Typed flat configuration; `values` maps every schema key."""

    values: dict = field(default_factory=_default_values)

    def __getitem__(self, key: str):
        return self.values[key]

    def set(self, key: str, raw: str) -> None:
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        self.values[key] = _parse_value(key, raw)

    def apply_assignment(self, text: str) -> None:
        """Apply a single `key=value` string (the --set grammar)."""
        if "=" not in text:
            raise ConfigError(f"expected key=value, got {text!r}")
        key, raw = text.split("=", 1)
        self.set(key.strip(), raw)


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        cfg.values[key] = _parse_value(key, raw)
    return cfg


def serialize_config(cfg: RunConfig) -> str:
    lines = []
    for section in _SECTION_ORDER:
        keys = sorted(k for k in _SCHEMA if k.split(".", 1)[0] == section)
        for key in keys:
            val = cfg.values[key]
            if isinstance(val, float):
                text = repr(val)
            else:
                text = str(val)
            lines.append(f"{key} = {text}")
        lines.append("")
    return "\n".join(lines)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def build_model_params(cfg: RunConfig) -> ModelParams:
    try:
        return ModelParams(kappa=cfg["model.kappa"], alpha=cfg["model.alpha"],
                           sigma=cfg["model.sigma"], spring_k=cfg["model.spring_k"],
                           dim=cfg["model.dim"])
    except ValueError as e:
        raise ConfigError(f"model: {e}") from None


def build_kernel(cfg: RunConfig) -> Kernel:
    try:
        return Kernel(decay_delta=cfg["model.kernel.delta"],
                      amplitude=cfg["model.kernel.amplitude"])
    except ValueError as e:
        raise ConfigError(f"model.kernel: {e}") from None


def build_force(cfg: RunConfig) -> WaveForce:
    try:
        return WaveForce(family=cfg["model.force.family"])
    except ValueError as e:
        raise ConfigError(f"model.force: {e}") from None


def build_potential(cfg: RunConfig) -> Potential:
    try:
        return Potential(family=cfg["model.potential.family"],
                         spring_k=cfg["model.spring_k"])
    except ValueError as e:
        raise ConfigError(f"model.potential: {e}") from None


def _effective_t_w(cfg: RunConfig) -> float:
    if cfg["sim.t_w"] != _AUTO:
        return float(cfg["sim.t_w"])
    return float(math.ceil(-math.log(cfg["sim.tail_tol"]) / cfg["model.kernel.delta"]))


def build_past(cfg: RunConfig, prefix: str = "past") -> InitialPast:
    """Materialize the initial past named by `prefix` ("past" or "couple").

    The orbital variant solves for the orbit when r0/omega are "auto"
    (taking the smallest-radius solution) and samples one truncation
    window by default.
    """
    variant = cfg[f"{prefix}.variant"]
    dim = cfg["model.dim"]
    if variant == "zero":
        return InitialPast.zero(dim)
    if variant == "constant":
        point = [cfg[f"{prefix}.point.x"]]
        if dim == 2:
            point.append(cfg[f"{prefix}.point.y"])
        return InitialPast.constant(point)
    if variant == "tabulated":
        path = cfg[f"{prefix}.file"]
        if not path:
            raise ConfigError(f"{prefix}.file: tabulated past needs a CSV path")
        try:
            tab = read_trajectory_csv(path)
        except ValueError as e:
            raise ConfigError(f"{prefix}.file: {e}") from None
        if tab.dim != dim:
            raise ConfigError(f"{prefix}.file: past dimension {tab.dim} != model dim {dim}")
        extend = cfg[f"{prefix}.extend"]
        ep = None
        if extend == "constant":
            ep = [cfg[f"{prefix}.extend.x"]]
            if dim == 2:
                ep.append(cfg[f"{prefix}.extend.y"])
        return InitialPast.tabulated(tab.times, tab.positions, tab.velocities,
                                     extend=extend, extend_point=ep)
    # orbital and bridge variants both need the circular-orbit state
    if dim != 2:
        raise ConfigError(f"{prefix}.variant: {variant} pasts exist only for model.dim = 2")
    from .orbits import OrbitSolution, orbital_past, solve_orbit

    r0, omega = cfg[f"{prefix}.r0"], cfg[f"{prefix}.omega"]
    if r0 == _AUTO or omega == _AUTO:
        sols = solve_orbit(build_model_params(cfg), build_kernel(cfg))
        if not sols:
            raise ConfigError(f"{prefix}.variant: no orbital state found to sample")
        sol = sols[0]
    else:
        sol = OrbitSolution(r0=float(r0), omega=float(omega),
                            residual_norm=float("nan"), quadrature_nodes=0)
    duration = cfg[f"{prefix}.duration"]
    if variant == "bridge":
        # ramp from rest at the origin to the orbital anchor over one period
        if duration == _AUTO:
            duration = 2.0 * math.pi / sol.omega
        return bridge_past((sol.r0, 0.0), (0.0, sol.r0 * sol.omega),
                           float(duration), cfg["sim.dt"])
    if duration == _AUTO:
        duration = _effective_t_w(cfg)
    return orbital_past(sol, float(duration), cfg["sim.dt"])


def build_sim_config(cfg: RunConfig, past: InitialPast | None = None,
                     seed: int | None = None) -> SimConfig:
    t_w = None if cfg["sim.t_w"] == _AUTO else float(cfg["sim.t_w"])
    return SimConfig(
        params=build_model_params(cfg),
        dt=cfg["sim.dt"],
        t_max=cfg["sim.t_max"],
        seed=cfg["sim.seed"] if seed is None else seed,
        kernel=build_kernel(cfg),
        force=build_force(cfg),
        potential=build_potential(cfg),
        initial_past=past if past is not None else build_past(cfg),
        t_w=t_w,
        tail_tol=cfg["sim.tail_tol"],
        stride=cfg["sim.stride"],
    )
