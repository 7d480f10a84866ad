"""Command line front end.

Eight subcommands: per-shape measurements (perim, asym, deficit),
function and field transforms (rearrange, extend), and batch studies
(sweep-s, exponent-study, verify).  Analysis output is CSV with a header
row; a --config file supplies defaults and explicit flags override it.
Exit code 0 means every assertion the command makes passed.
"""

from __future__ import annotations

import argparse
import sys

from .deficit import DEFICIT_CSV_HEADER, fraenkel_asymmetry, s_deficit
from .errors import FracperimError
from .experiments import (
    ExperimentConfig,
    config_from_mapping,
    exponent_study,
    k_limit_estimate,
    load_config,
    sweep_csv,
    sweep_s,
    verify_suite,
)
from .extension import extension_domain, extension_energy, poisson_extend, save_extension
from .kernels import KernelParams, build_table
from .perimeter import fractional_perimeter
from .rearrange import (
    load_gridfunction,
    polya_szego_report,
    save_gridfunction,
    symmetric_rearrangement,
)
from .shapes import auto_spec, parse_shape, rasterize

__all__ = ["main"]


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="flat key=value defaults file")
    p.add_argument("--n", type=int, choices=(1, 2), help="ambient dimension")
    p.add_argument("--s", help="order in (0,1); comma list for sweeps")
    p.add_argument("--h", help="grid spacing; comma list for sweeps")
    p.add_argument("--margin", type=int, help="halo width in cutoff radii")
    p.add_argument("--cutoff", type=int, help="near-window radius in cells")
    p.add_argument("--threads", type=int, help="worker threads")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    p.add_argument("--out", metavar="FILE", help="write output here instead of stdout")


def _add_zgrid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--z0", type=float, help="first extension level (default h/4)")
    p.add_argument("--rho", type=float, help="geometric level ratio")
    p.add_argument("--top-factor", type=float, help="top height over set diameter")
    p.add_argument("--lateral-factor", type=float, help="side padding over diameter")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="fracperim",
        description="nonlocal perimeters, asymmetry, deficits, and lifts on grids",
    )
    sub = top.add_subparsers(dest="command", required=True)

    shape_help = 'shape text, e.g. "kind=ball r=1.0 cx=0.0 cy=0.0"'

    p = sub.add_parser("perim", help="fractional perimeter of one shape")
    p.add_argument("--shape", required=True, help=shape_help)
    _add_common(p)

    p = sub.add_parser("asym", help="round-window asymmetry of one shape")
    p.add_argument("--shape", required=True, help=shape_help)
    _add_common(p)

    p = sub.add_parser("deficit", help="deficit report for one shape")
    p.add_argument("--shape", required=True, help=shape_help)
    _add_common(p)

    p = sub.add_parser("rearrange", help="symmetric decreasing rearrangement")
    p.add_argument("--infile", required=True, help="grid function file (FRACFUN v1)")
    _add_common(p)

    p = sub.add_parser("extend", help="upper half space lift of one shape")
    p.add_argument("--shape", required=True, help=shape_help)
    _add_common(p)
    _add_zgrid(p)

    p = sub.add_parser("sweep-s", help="family sweep over s and h")
    p.add_argument("--family", help="comma list of family names")
    p.add_argument("--params", help="comma list of family parameters")
    _add_common(p)

    p = sub.add_parser("exponent-study", help="log-log exponent fits per family")
    p.add_argument("--family", help="comma list of family names")
    p.add_argument("--params", help="comma list of family parameters")
    _add_common(p)

    p = sub.add_parser("verify", help="run every built-in invariant check")
    _add_common(p)
    return top


def _merge_config(args) -> ExperimentConfig:
    """Config file first, explicit flags override, defaults fill the rest."""
    mapping: dict = {}
    if args.config:
        base = load_config(args.config)
    else:
        base = ExperimentConfig()
    if args.n is not None:
        mapping["dim"] = str(args.n)
    if args.s is not None:
        mapping["s"] = args.s
    if args.h is not None:
        mapping["h"] = args.h
    for key in ("margin", "cutoff", "threads", "seed"):
        val = getattr(args, key)
        if val is not None:
            mapping[key] = str(val)
    for key in ("z0", "rho", "top_factor", "lateral_factor"):
        val = getattr(args, key, None)
        if val is not None:
            mapping[key] = str(val)
    family = getattr(args, "family", None)
    if family is not None:
        mapping["family"] = family
    params = getattr(args, "params", None)
    if params is not None:
        mapping["params"] = params
    if args.out is not None:
        mapping["out"] = args.out
    overlay = config_from_mapping(mapping)
    fields = {
        name: getattr(base, name) for name in ExperimentConfig.__dataclass_fields__
    }
    for name in _mapped_names(mapping):
        fields[name] = getattr(overlay, name)
    return ExperimentConfig(**fields)


_KEY_TO_FIELD = {
    "dim": "dim", "s": "s_values", "h": "h_values", "family": "family",
    "params": "params", "margin": "margin", "cutoff": "cutoff",
    "threads": "threads", "seed": "seed", "tolerance": "tolerance",
    "out": "out", "z0": "z0", "rho": "rho", "top_factor": "top_factor",
    "lateral_factor": "lateral_factor",
}


def _mapped_names(mapping: dict) -> set:
    return {_KEY_TO_FIELD[k] for k in mapping}


def _single(values, what: str) -> float:
    if len(values) != 1:
        raise ValueError(f"this command takes exactly one {what}, got {values}")
    return values[0]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _shape_setup(args, cfg: ExperimentConfig):
    shape = parse_shape(args.shape)
    if args.n is not None and args.n != shape.dim:
        raise ValueError(f"--n {args.n} contradicts a {shape.dim}-dimensional shape")
    h = _single(cfg.h_values, "h")
    e = rasterize(shape, auto_spec(shape, h))
    return shape, e, h


def _cmd_perim(args, cfg: ExperimentConfig) -> int:
    shape, e, h = _shape_setup(args, cfg)
    s = _single(cfg.s_values, "s")
    table = build_table(KernelParams(shape.dim, s), h=h, cutoff=cfg.cutoff)
    ps = fractional_perimeter(e, table, cfg.margin, cfg.threads)
    rows = [
        "set,N,s,h,cells,Ps",
        ",".join(
            [args.shape, str(shape.dim), _g17(s), _g17(h), str(e.cell_count), _g17(ps)]
        ),
    ]
    _emit("\n".join(rows) + "\n", cfg.out)
    return 0


def _cmd_asym(args, cfg: ExperimentConfig) -> int:
    shape, e, h = _shape_setup(args, cfg)
    a, center = fraenkel_asymmetry(e)
    cy = _g17(center[1]) if shape.dim == 2 else ""
    rows = [
        "set,N,h,A,cx,cy",
        ",".join([args.shape, str(shape.dim), _g17(h), _g17(a), _g17(center[0]), cy]),
    ]
    _emit("\n".join(rows) + "\n", cfg.out)
    return 0


def _cmd_deficit(args, cfg: ExperimentConfig) -> int:
    shape, e, h = _shape_setup(args, cfg)
    s = _single(cfg.s_values, "s")
    table = build_table(KernelParams(shape.dim, s), h=h, cutoff=cfg.cutoff)
    report = s_deficit(
        e, table, set_id=args.shape, margin=cfg.margin, threads=cfg.threads
    )
    _emit(DEFICIT_CSV_HEADER + "\n" + report.csv_row() + "\n", cfg.out)
    return 0


def _cmd_rearrange(args, cfg: ExperimentConfig) -> int:
    g = load_gridfunction(args.infile)
    sharp = symmetric_rearrangement(g)
    if cfg.out:
        save_gridfunction(sharp, cfg.out)
    report = polya_szego_report(g)
    rows = [
        "infile,energy_before,energy_after,gap,l1_distance,support_measure",
        ",".join(
            [
                args.infile,
                _g17(report.energy_g),
                _g17(report.energy_gsharp),
                _g17(report.gap),
                _g17(report.l1_distance),
                _g17(report.support_measure),
            ]
        ),
    ]
    sys.stdout.write("\n".join(rows) + "\n")
    return 0


def _cmd_extend(args, cfg: ExperimentConfig) -> int:
    shape, e, h = _shape_setup(args, cfg)
    s = _single(cfg.s_values, "s")
    grid, embedded = extension_domain(
        e,
        z0=cfg.z0,
        rho=cfg.rho,
        top_factor=cfg.top_factor,
        lateral_factor=cfg.lateral_factor,
    )
    u = poisson_extend(embedded, grid, KernelParams(shape.dim, s), threads=cfg.threads)
    if cfg.out:
        save_extension(u, cfg.out)
    energy = extension_energy(u)
    rows = [
        "set,N,s,h,levels,z0,z_top,energy,x_part,z_part,truncation_estimate",
        ",".join(
            [
                args.shape,
                str(shape.dim),
                _g17(s),
                _g17(h),
                str(grid.level_count),
                _g17(grid.z_levels[0]),
                _g17(grid.z_levels[-1]),
                _g17(energy.total),
                _g17(energy.x_part),
                _g17(energy.z_part),
                _g17(energy.truncation_estimate),
            ]
        ),
    ]
    sys.stdout.write("\n".join(rows) + "\n")
    return 0


def _cmd_sweep(args, cfg: ExperimentConfig) -> int:
    records = sweep_s(cfg)
    text = sweep_csv(records)
    _emit(text, cfg.out)
    if cfg.out:
        sys.stdout.write(f"{len(records)} records -> {cfg.out}\n")
        sys.stdout.write(f"K_limit_estimate,{_g17(k_limit_estimate(records))}\n")
    return 0


def _cmd_exponent(args, cfg: ExperimentConfig) -> int:
    summary = exponent_study(cfg)
    if cfg.out:
        _emit(sweep_csv(summary.records), cfg.out)
    for line in summary.summary_lines():
        sys.stdout.write(line + "\n")
    ok = True
    for fit in summary.fits:
        if fit.degenerate or fit.divergent:
            ok = False
        elif fit.slope < 0.25 * fit.s - 0.02:
            ok = False
    return 0 if ok else 1


def _cmd_verify(args, cfg: ExperimentConfig) -> int:
    report = verify_suite(cfg)
    _emit(report.csv_text(), cfg.out)
    if cfg.out:
        status = "PASS" if report.passed else "FAIL"
        sys.stdout.write(f"{status}: {len(report.checks)} checks -> {cfg.out}\n")
    return 0 if report.passed else 1


_COMMANDS = {
    "perim": _cmd_perim,
    "asym": _cmd_asym,
    "deficit": _cmd_deficit,
    "rearrange": _cmd_rearrange,
    "extend": _cmd_extend,
    "sweep-s": _cmd_sweep,
    "exponent-study": _cmd_exponent,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        return _COMMANDS[args.command](args, cfg)
    except (FracperimError, ValueError, OSError) as exc:
        sys.stderr.write(f"fracperim: error: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
