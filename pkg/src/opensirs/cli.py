"""Command-line front end.

Subcommands take a flat key=value config file naming the nine rates plus
command options; `make-bistable` is the exception, taking its inputs as
flags and emitting a ready-to-run config.  Exit codes: 0 success, 1 usage
or config error, 2 numerical failure (the message names the error class).

    opensirs analyze run.cfg
    opensirs simulate run.cfg --out traj.csv
    opensirs index run.cfg                 # curve=triangle|fig31|fig32|circle@(x,y,r)
    opensirs make-bistable --eps1 2 --eps2 4 --lambda 1 --out bistable.cfg
"""

from __future__ import annotations

import argparse
import io
import re
import sys

import numpy as np

from . import analysis, dynamics, equilibria, formats, portrait, winding
from .errors import ConfigError, OpenSirsError
from .model import ModelParams, planar_field

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract reserves 2 for
    # numerical failures, so remap usage problems to 1.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result document here instead of stdout")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for any sampled starting points (default 0)")
    common.add_argument("--rtol", type=float, default=dynamics.DEFAULT_RTOL)
    common.add_argument("--atol", type=float, default=dynamics.DEFAULT_ATOL)
    common.add_argument("--quiet", action="store_true",
                        help="suppress informational notes on stderr")

    parser = _Parser(prog="opensirs", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("analyze", "special-case", "simulate", "index",
                 "basins", "sweep", "portrait"):
        cmd = sub.add_parser(name, parents=[common])
        cmd.add_argument("config", help="key=value config file")

    make = sub.add_parser("make-bistable", parents=[common])
    make.add_argument("--eps1", type=float, required=True)
    make.add_argument("--eps2", type=float, required=True)
    make.add_argument("--lambda", dest="lam", type=float, required=True)
    make.add_argument("--fraction", type=float, default=0.4)
    make.add_argument("--delta", type=float, default=1e-3)
    return parser


def _emit(args, text: str, what: str) -> None:
    if args.out:
        formats.atomic_write_text(args.out, text)
        if not args.quiet:
            print(f"wrote {what} to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _opt_float(cfg: formats.RunConfig, key: str, default: float | None = None) -> float:
    raw = cfg.options.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"{cfg.source}: missing required option {key!r}")
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"{cfg.source}: option {key!r} is not a number: {raw!r}"
        ) from None


def _opt_int(cfg: formats.RunConfig, key: str, default: int) -> int:
    raw = cfg.options.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(
            f"{cfg.source}: option {key!r} is not an integer: {raw!r}"
        ) from None


def _cmd_analyze(args) -> None:
    cfg = formats.load_config(args.config, allowed_options=("inset",))
    verdict = analysis.classify_regime(cfg.params, inset=_opt_float(cfg, "inset", 1e-4))
    _emit(args, formats.emit_json(verdict) + "\n", "regime verdict")


def _cmd_special_case(args) -> None:
    cfg = formats.load_config(args.config)
    report = equilibria.special_case_report(cfg.params)
    _emit(args, formats.emit_json(report) + "\n", "special-case report")


def _cmd_simulate(args) -> None:
    cfg = formats.load_config(
        args.config,
        allowed_options=("system", "s0", "i0", "r0", "S0", "I0", "R0",
                         "t_end", "n_store"),
    )
    system = cfg.options.get("system", "planar")
    t_end = _opt_float(cfg, "t_end")
    n_store = _opt_int(cfg, "n_store", 201)
    if system == "planar":
        x0 = (_opt_float(cfg, "s0"), _opt_float(cfg, "i0"))
    elif system == "proportions":
        x0 = (_opt_float(cfg, "s0"), _opt_float(cfg, "i0"), _opt_float(cfg, "r0"))
    elif system == "population":
        x0 = (_opt_float(cfg, "S0"), _opt_float(cfg, "I0"), _opt_float(cfg, "R0"))
    else:
        raise ConfigError(
            f"{cfg.source}: system must be planar, proportions, or population, "
            f"got {system!r}"
        )
    traj = dynamics.integrate(system, cfg.params, x0, t_end,
                              rtol=args.rtol, atol=args.atol, n_store=n_store)
    header, _ = formats.trajectory_csv_rows(traj)
    buf = io.StringIO()
    formats.write_trajectory_csv(traj, buf)
    _emit(args, buf.getvalue(), f"{system} trajectory ({','.join(header)})")


_CIRCLE_RE = re.compile(
    r"^circle@\(\s*([^\s,()]+)\s*,\s*([^\s,()]+)\s*,\s*([^\s,()]+)\s*\)$"
)


def _curve_for(cfg: formats.RunConfig, p: ModelParams):
    token = cfg.options.get("curve", "triangle")
    if token == "triangle":
        return winding.curve_triangle(_opt_float(cfg, "inset", 1e-4))
    if token == "fig31":
        return winding.curve_origin_enclosed(p, _opt_float(cfg, "disk_radius", 0.05))
    if token == "fig32":
        raw = cfg.options.get("radii")
        radii = None
        if raw is not None:
            parts = raw.split(",")
            if len(parts) != 3:
                raise ConfigError(f"{cfg.source}: radii must be r1,r2,r3, got {raw!r}")
            try:
                radii = tuple(float(x) for x in parts)
            except ValueError:
                raise ConfigError(
                    f"{cfg.source}: radii must be numeric, got {raw!r}"
                ) from None
        return winding.curve_origin_excised(p, radii)
    match = _CIRCLE_RE.match(token)
    if match:
        try:
            x, y, r = (float(g) for g in match.groups())
        except ValueError:
            raise ConfigError(
                f"{cfg.source}: circle spec must be numeric, got {token!r}"
            ) from None
        return winding.circle_curve((x, y), r)
    raise ConfigError(
        f"{cfg.source}: curve must be triangle, fig31, fig32, or "
        f"circle@(x,y,r), got {token!r}"
    )


def _cmd_index(args) -> None:
    cfg = formats.load_config(
        args.config, allowed_options=("curve", "inset", "disk_radius", "radii")
    )
    curve = _curve_for(cfg, cfg.params)
    rest_points = equilibria.find_rest_points(cfg.params, region="plane")
    report = winding.winding_index(planar_field(cfg.params), curve,
                                   rest_points=rest_points)
    _emit(args, formats.emit_json(report) + "\n", "index report")


def _cmd_basins(args) -> None:
    cfg = formats.load_config(
        args.config, allowed_options=("probe_resolution", "boundary_samples", "svg")
    )
    verdict = analysis.classify_regime(cfg.params)
    report = analysis.basin_analysis(
        cfg.params,
        verdict,
        probe_resolution=_opt_int(cfg, "probe_resolution", 10),
        boundary_samples=_opt_int(cfg, "boundary_samples", 32),
        rtol=args.rtol,
        atol=args.atol,
    )
    svg_path = cfg.options.get("svg")
    if svg_path:
        doc = portrait.render_portrait(cfg.params, verdict, basins=report)
        formats.atomic_write_text(svg_path, doc)
        if not args.quiet:
            print(f"wrote basin overlay to {svg_path}", file=sys.stderr)
    _emit(args, formats.emit_json(report) + "\n", "basin report")


def _cmd_sweep(args) -> None:
    cfg = formats.load_config(
        args.config, allowed_options=("axis1", "axis1_range", "axis2", "axis2_range")
    )
    axes = []
    for key in ("axis1", "axis2"):
        name = cfg.options.get(key)
        if name is None:
            raise ConfigError(f"{cfg.source}: missing required option {key!r}")
        rng_raw = cfg.options.get(f"{key}_range")
        if rng_raw is None:
            raise ConfigError(f"{cfg.source}: missing required option '{key}_range'")
        lo, hi, n = formats.parse_range(rng_raw, f"{key}_range", cfg.source)
        try:
            axes.append(analysis.SweepAxis(name=name, lo=lo, hi=hi, n=n))
        except ValueError as err:
            raise ConfigError(f"{cfg.source}: {err}") from None
    result = analysis.parameter_sweep(cfg.params, axes[0], axes[1])
    lines = ["axis1,axis2,label,mu0,mu1,mu2,degenerate_flag"]
    v1 = result.axis1.values()
    v2 = result.axis2.values()
    for j in range(result.axis1.n):
        for k in range(result.axis2.n):
            label = result.labels[j][k]
            mu = result.mus[j][k]
            mu_txt = (
                f"{mu[0]},{mu[1]},{mu[2]}" if mu is not None else ",,"
            )
            flag = 1 if label == analysis.REGIME_DEGENERATE else 0
            lines.append(
                f"{formats.format_float(v1[j])},{formats.format_float(v2[k])},"
                f"{label},{mu_txt},{flag}"
            )
    _emit(args, "\n".join(lines) + "\n", "regime sweep")


def _cmd_portrait(args) -> None:
    cfg = formats.load_config(
        args.config, allowed_options=("trajectories", "t_end", "with_basins")
    )
    verdict = analysis.classify_regime(cfg.params)
    n_traj = _opt_int(cfg, "trajectories", 6)
    t_end = _opt_float(cfg, "t_end", 50.0)
    rng = np.random.default_rng(args.seed)
    trajs = []
    for _ in range(n_traj):
        while True:
            s0, i0 = rng.uniform(0.0, 1.0, size=2)
            if s0 + i0 < 1.0:
                break
        trajs.append(
            dynamics.integrate("planar", cfg.params, (s0, i0), t_end,
                               rtol=args.rtol, atol=args.atol)
        )
    basins = None
    if _opt_int(cfg, "with_basins", 0):
        basins = analysis.basin_analysis(cfg.params, verdict,
                                         rtol=args.rtol, atol=args.atol)
    doc = portrait.render_portrait(cfg.params, verdict, basins=basins,
                                   trajectories=tuple(trajs))
    _emit(args, doc, "phase portrait")


def _cmd_make_bistable(args) -> None:
    special = analysis.bistable_special_instance(
        args.eps1, args.eps2, args.lam, args.fraction
    )
    perturbed = analysis.perturb_special_case(special, args.delta)
    ff = formats.format_float
    lines = [
        "# regime-B instance: bistable boundary construction, then a joint",
        f"# b=gamma=beta1 offset of {ff(perturbed.b)} with beta held fixed",
        f"b={ff(perturbed.b)}",
        f"d={ff(perturbed.d)}",
        f"eps1={ff(perturbed.eps1)}",
        f"eps2={ff(perturbed.eps2)}",
        f"lambda={ff(perturbed.lam)}",
        f"alpha={ff(perturbed.alpha)}",
        f"gamma={ff(perturbed.gamma)}",
        f"beta1={ff(perturbed.beta1)}",
        f"beta2={ff(perturbed.beta2)}",
    ]
    _emit(args, "\n".join(lines) + "\n", "regime-B config")


_COMMANDS = {
    "analyze": _cmd_analyze,
    "special-case": _cmd_special_case,
    "simulate": _cmd_simulate,
    "index": _cmd_index,
    "basins": _cmd_basins,
    "sweep": _cmd_sweep,
    "portrait": _cmd_portrait,
    "make-bistable": _cmd_make_bistable,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except (OpenSirsError, ValueError) as err:
        print(f"numerical failure {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
