"""Command-line front end.

Subcommands: simulate, orbit, pdf, moments, couple, verify.  Common
flags: --config FILE, --set key=value (repeatable, last wins), --out
DIR, --seed N, and --full (full-length production run, t_max = 1e5).
Exit codes: 0 success, 2 configuration error, 3 numerical failure
(blow-up or non-convergent quadrature), 4 assumption check failed,
5 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import (
    RunConfig,
    build_force,
    build_kernel,
    build_model_params,
    build_past,
    build_potential,
    build_sim_config,
    load_config,
)
from .integrator import (
    BlowUpError,
    ConfigError,
    couple_simulate,
    read_trajectory_csv,
    simulate,
)
from .model import energy_phi, verify_assumptions
from .orbits import QuadratureError, solve_orbit
from .stats import (
    MomentSeries,
    ensemble_energy_moments,
    pdf_l1_distance,
    peak_location,
    radial_pdf,
    write_moment_series_csv,
    write_radial_pdf_csv,
)

FULL_T_MAX = 1e5


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="config file to load")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides", help="override one config key (repeatable)")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", metavar="N", type=int, help="override sim.seed")
    common.add_argument("--full", action="store_true",
                        help=f"production length run (sim.t_max = {FULL_T_MAX:g})")

    parser = argparse.ArgumentParser(
        prog="pilotwave",
        description="stochastic pilot-wave walker: simulation and analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common],
                   help="integrate one trajectory and write its CSV")
    sub.add_parser("orbit", parents=[common],
                   help="solve for orbital states, print r0,omega,residual")
    p_pdf = sub.add_parser("pdf", parents=[common],
                           help="radial density of a run (or an existing CSV)")
    p_pdf.add_argument("--traj", metavar="PATH", help="reuse an existing trajectory CSV")
    p_mom = sub.add_parser("moments", parents=[common],
                           help="ensemble energy moments over time")
    p_mom.add_argument("--traj", metavar="PATH", help="reuse an existing trajectory CSV")
    sub.add_parser("couple", parents=[common],
                   help="two runs with shared noise from different pasts")
    sub.add_parser("verify", parents=[common],
                   help="check the structural assumptions of the model")
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for item in args.overrides:
        cfg.apply_assignment(item)
    if args.out is not None:
        cfg.values["output.dir"] = args.out
    if args.seed is not None:
        cfg.values["sim.seed"] = args.seed
    if args.full:
        cfg.values["sim.t_max"] = FULL_T_MAX
    return cfg


def _out_path(cfg: RunConfig, suffix: str) -> Path:
    out = Path(cfg["output.dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out / f"{cfg['output.prefix']}_{suffix}"


def _cmd_simulate(cfg: RunConfig) -> int:
    sim = build_sim_config(cfg)
    started = time.perf_counter()
    traj = simulate(sim)
    elapsed = time.perf_counter() - started
    path = _out_path(cfg, "trajectory.csv")
    traj.write_csv(path)
    print(f"wrote {path} ({traj.times.size} rows) in {elapsed:.2f}s; "
          f"sup|H| = {traj.h_sup_observed:.6g}, "
          f"truncation bound = {traj.truncation_bound():.3e}", file=sys.stderr)
    return 0


def _cmd_orbit(cfg: RunConfig) -> int:
    solutions = solve_orbit(build_model_params(cfg), build_kernel(cfg))
    lines = ["r0,omega,residual"]
    lines += [f"{s.r0!r},{s.omega!r},{s.residual_norm!r}" for s in solutions]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    path = _out_path(cfg, "orbits.csv")
    path.write_text(text)
    return 0


def _load_or_run(cfg: RunConfig, traj_path: str | None):
    if traj_path:
        try:
            return read_trajectory_csv(traj_path)
        except ValueError as e:
            raise ConfigError(f"--traj: {e}") from None
    return simulate(build_sim_config(cfg))


def _cmd_pdf(cfg: RunConfig, traj_path: str | None) -> int:
    traj = _load_or_run(cfg, traj_path)
    r_max = cfg["pdf.r_max"]
    pdf = radial_pdf(traj, burn_in_fraction=cfg["pdf.burn_in"], bins=cfg["pdf.bins"],
                     r_max=None if r_max == "auto" else float(r_max))
    path = _out_path(cfg, "pdf.csv")
    write_radial_pdf_csv(pdf, path)
    print(f"wrote {path}; peak at r = {peak_location(pdf):.6g} "
          f"from {pdf.n_samples} samples", file=sys.stderr)
    return 0


def _cmd_moments(cfg: RunConfig, traj_path: str | None) -> int:
    import numpy as np

    if traj_path:
        traj = _load_or_run(cfg, traj_path)
        phi = energy_phi(traj.positions, traj.velocities, build_potential(cfg))
        series = MomentSeries(times=traj.times, mean_phi=np.asarray(phi),
                              mean_phi_p=np.asarray(phi) ** cfg["moments.p"],
                              p=cfg["moments.p"], n_members=1)
    else:
        members = cfg["moments.members"]
        if members < 1:
            raise ConfigError(f"moments.members must be at least 1, got {members}")
        base_seed = cfg["sim.seed"]
        configs = [build_sim_config(cfg, seed=base_seed + i) for i in range(members)]
        series = ensemble_energy_moments(configs, p=cfg["moments.p"])
    path = _out_path(cfg, "moments.csv")
    write_moment_series_csv(series, path)
    print(f"wrote {path} ({series.n_members} members)", file=sys.stderr)
    return 0


def _cmd_couple(cfg: RunConfig) -> int:
    sim = build_sim_config(cfg)
    past_a = build_past(cfg, "past")
    past_b = build_past(cfg, "couple")
    traj_a, traj_b = couple_simulate(sim, past_a, past_b)
    path_a = _out_path(cfg, "coupled_a.csv")
    path_b = _out_path(cfg, "coupled_b.csv")
    traj_a.write_csv(path_a)
    traj_b.write_csv(path_b)
    r_max = cfg["pdf.r_max"]
    if r_max == "auto":
        import numpy as np

        r_max = float(max(np.max(np.abs(traj_a.positions)), np.max(np.abs(traj_b.positions)),
                          1e-12) * 2.0)
    pdf_a = radial_pdf(traj_a, burn_in_fraction=cfg["pdf.burn_in"],
                       bins=cfg["pdf.bins"], r_max=float(r_max))
    pdf_b = radial_pdf(traj_b, burn_in_fraction=cfg["pdf.burn_in"],
                       bins=cfg["pdf.bins"], r_max=float(r_max))
    print(f"wrote {path_a} and {path_b}; post-burn-in radial L1 distance = "
          f"{pdf_l1_distance(pdf_a, pdf_b):.6g}", file=sys.stderr)
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    report = verify_assumptions(build_model_params(cfg), kernel=build_kernel(cfg),
                                force=build_force(cfg), potential=build_potential(cfg))
    for line in report.lines():
        print(line)
    return 0 if report.passed else 4


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if args.command == "simulate":
            return _cmd_simulate(cfg)
        if args.command == "orbit":
            return _cmd_orbit(cfg)
        if args.command == "pdf":
            return _cmd_pdf(cfg, args.traj)
        if args.command == "moments":
            return _cmd_moments(cfg, args.traj)
        if args.command == "couple":
            return _cmd_couple(cfg)
        return _cmd_verify(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except BlowUpError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 3
    except QuadratureError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
