"""
Command-line surface: python -m knotforge <command> [options]

Commands: crossings, identify, synth, reduce, plot, patterns.
--input and --pattern accept a file path or the name of an embedded fixture.
Exit codes: 0 success, 2 degenerate input, 3 infeasible within budget, 4 bad input.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from knotforge.config import RunConfig, configure_logging
from knotforge.errors import InputError, KnotForgeError
from knotforge.fixtures import CURVES, PATTERNS
from knotforge.services.curve import Parameterization, double_points, is_compact_embedding, pair_check
from knotforge.services.curve_files import dumps_curve, dumps_pattern, read_curve, read_pattern
from knotforge.services.diagram import (
    KNOT_DETERMINANTS,
    SignPattern,
    alexander,
    build_diagram,
    canonical_gauss,
    determinant,
    enumerate_patterns,
    identify,
    tricolor_count,
)
from knotforge.services.plotting import render_svg
from knotforge.services.ratfunc import RationalFunction, count_monotonic_regions
from knotforge.services.synth import reduce_to_minimal, synthesize_height

logger = logging.getLogger("knotforge.cli")


def load_curve(source: str) -> Parameterization:
    if Path(source).is_file():
        return read_curve(source)
    if source in CURVES:
        return CURVES[source]
    raise InputError(f"'{source}' is neither a curve file nor a fixture ({', '.join(sorted(CURVES))})")


def load_pattern(source: Optional[str]) -> Optional[SignPattern]:
    if source is None:
        return None
    if Path(source).is_file():
        return read_pattern(source)
    if source in PATTERNS:
        return PATTERNS[source]
    raise InputError(f"'{source}' is neither a pattern file nor a stored pattern ({', '.join(sorted(PATTERNS))})")


def format_alexander(coeffs) -> str:
    terms = []
    for power in range(len(coeffs) - 1, -1, -1):
        c = coeffs[power]
        if c == 0:
            continue
        sign = "-" if c < 0 else ("+" if terms else "")
        magnitude = abs(c)
        if power == 0:
            body = f"{magnitude}"
        else:
            body = ("" if magnitude == 1 else f"{magnitude}") + "t" + (f"^{power}" if power > 1 else "")
        terms.append(f"{sign}{body}" if not terms else f" {sign} {body}")
    return "".join(terms) or "0"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
        logger.info(f"✓ Wrote {out}")
    else:
        sys.stdout.write(text)


def _config(args: argparse.Namespace) -> RunConfig:
    overrides: Dict[str, Any] = {}
    for flag, field in (("tol", "solver_tol"), ("root_tol", "root_tol"), ("seed", "seed"),
                        ("lift_factor", "lift_factor"), ("budget", "budget"), ("workers", "workers"),
                        ("min_margin", "min_margin"), ("pattern", "pattern_path"), ("out", "out_path")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[field] = value
    return RunConfig(**overrides)


def cmd_crossings(args: argparse.Namespace, cfg: RunConfig) -> int:
    p = load_curve(args.input)
    f, g = p.projection(tuple(args.axes.split(",")))
    dps = double_points(f, g, cfg.solver_tol)
    lines = [f"{p.name}: {len(dps)} double points"]
    for dp in dps:
        lines.append(
            f"{dp.index:3d}  s={dp.s:.10f}  t={dp.t:.10f}  x={dp.position[0]:.10g}  y={dp.position[1]:.10g}"
            f"  residual={pair_check(f, g, dp):.2e}"
        )
    _emit("\n".join(lines) + "\n", cfg.out_path)
    return 0


def _monotonic_line(h: RationalFunction, cfg: RunConfig) -> str:
    try:
        return f"z monotonic regions: {count_monotonic_regions(h, cfg.root_tol)}"
    except KnotForgeError as e:
        return f"z monotonic regions: n/a ({e})"


def cmd_identify(args: argparse.Namespace, cfg: RunConfig) -> int:
    p = load_curve(args.input)
    p.coordinate("z")
    problems = p.violations(cfg.root_tol)
    lines = [f"{p.name}: degree sequence {p.degree_sequence()}", _monotonic_line(p.z, cfg)]
    lines += [f"violation: {problem}" for problem in problems]
    status = 2 if problems else 0
    try:
        dps = double_points(p.x, p.y, cfg.solver_tol)
        d = build_diagram(p.x, p.y, p.z, dps)
        lines += [
            f"crossings: {d.crossing_count}",
            f"gauss: {d.gauss}",
            f"canonical gauss: {canonical_gauss(d)}",
            f"pd: {d.pd_code}",
            f"tricolor count: {tricolor_count(d)}",
            f"determinant: {determinant(d)}",
            f"alexander: {format_alexander(alexander(d))}",
            f"knot: {identify(d)}",
        ]
        if not problems and not is_compact_embedding(p, dps, cfg.solver_tol, root_tol=cfg.root_tol):
            lines.append("violation: curve is not an embedding at its crossings")
            status = 2
    except KnotForgeError as e:
        logger.warning(f"⚠ Identification failed: {e}")
        lines.append(f"identification failed: {e}")
        status = max(status, e.exit_code)
    _emit("\n".join(lines) + "\n", cfg.out_path)
    return status


def cmd_synth(args: argparse.Namespace, cfg: RunConfig) -> int:
    p = load_curve(args.input)
    pattern = load_pattern(args.pattern)
    if pattern is None:
        raise InputError("synth needs --pattern")
    dps = double_points(p.x, p.y, cfg.solver_tol)
    result = synthesize_height(dps, pattern, cfg.synth_options())
    out = p.with_coordinate("z", result.h)
    meta = {"source": "synth", "seed": cfg.seed, "solver_tol": cfg.solver_tol, "margins": list(result.margins),
            "monotonic_regions": count_monotonic_regions(result.h, cfg.root_tol)}
    _emit(dumps_curve(out, meta), cfg.out_path)
    logger.info(f"✓ Synthesized z = {result.h}; margins {', '.join(f'{m:.4g}' for m in result.margins)}")
    return 0


def cmd_reduce(args: argparse.Namespace, cfg: RunConfig) -> int:
    p = load_curve(args.input)
    out = reduce_to_minimal(p, args.target, cfg.synth_options(), load_pattern(args.pattern))
    meta = {"source": "reduce", "target": args.target, "seed": cfg.seed, "solver_tol": cfg.solver_tol,
            "degree_sequence": str(out.degree_sequence())}
    _emit(dumps_curve(out, meta), cfg.out_path)
    return 0


def cmd_plot(args: argparse.Namespace, cfg: RunConfig) -> int:
    p = load_curve(args.input)
    svg = render_svg(p, tuple(args.axes.split(",")), color=args.color, tol=cfg.solver_tol)
    _emit(svg, cfg.out_path)
    return 0


def cmd_patterns(args: argparse.Namespace, cfg: RunConfig) -> int:
    p = load_curve(args.input)
    f, g = p.projection(tuple(args.axes.split(",")))
    dps = double_points(f, g, cfg.solver_tol)
    found = enumerate_patterns(dps, args.target, limit=args.limit)
    lines = [f"{len(found)} patterns over {len(dps)} crossings identify as {args.target}"]
    lines += [json.dumps(json.loads(dumps_pattern(pattern))) for pattern in found]
    _emit("\n".join(lines) + "\n", cfg.out_path)
    return 0


COMMANDS = {
    "crossings": cmd_crossings,
    "identify": cmd_identify,
    "synth": cmd_synth,
    "reduce": cmd_reduce,
    "plot": cmd_plot,
    "patterns": cmd_patterns,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knotforge", description="Compact rational knots: crossings, invariants, synthesis")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)
    targets = sorted(KNOT_DETERMINANTS)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--input", required=True, help="Curve file or fixture name")
        cmd.add_argument("--tol", type=float, help="Solver tolerance")
        cmd.add_argument("--root-tol", type=float, help="Real-root isolation tolerance")
        cmd.add_argument("--out", help="Output file (stdout when omitted)")
        if name in ("synth", "reduce"):
            cmd.add_argument("--pattern", help="Pattern file or stored pattern name")
            cmd.add_argument("--seed", type=int)
            cmd.add_argument("--lift-factor", type=float)
            cmd.add_argument("--budget", type=int)
            cmd.add_argument("--workers", type=int)
            cmd.add_argument("--min-margin", type=float)
        if name in ("reduce", "patterns"):
            cmd.add_argument("--target", required=True, choices=targets)
        if name in ("crossings", "plot", "patterns"):
            cmd.add_argument("--axes", default="x,y", help="Projection axes, e.g. x,z")
        if name == "plot":
            cmd.add_argument("--color", action="store_true", help="Colour arcs by a 3-colouring")
        if name == "patterns":
            cmd.add_argument("--limit", type=int, default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        cfg = _config(args)
    except ValidationError as e:
        fields = ", ".join(".".join(str(part) for part in err["loc"]) for err in e.errors())
        print(f"error: invalid configuration ({fields}): {e}", file=sys.stderr)
        return InputError.exit_code
    try:
        return COMMANDS[args.command](args, cfg)
    except KnotForgeError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unhandled exception: {e}", exc_info=True)
        return 1
