# Canonicity CLI -> verify a Dehn filling of the Borromean rings from the command line
"""
Inputs:
    - verify --slope1 P/Q --slope2 P/Q [--basis] [--variant] [--diagonal] [--twist-sign]
      [--tol] [--seed] [--json PATH] [--svg PATH] [--png PATH] [--export-tri PATH] [--sweep K]
    - CANON_SEED / CANON_LOG_LEVEL environment variables

Outputs:
    - Coloured one-screen summary, optional JSON report, cusp pictures, triangulation text
    - Exit code: 0 pipeline completed (canonical or not), 2 construction error,
      3 solver or numeric failure

Description:
    Builds the filled triangulation, solves its shapes (retrying the next
    assembly candidate when the solver gives up), checks canonicity at every
    face and serializes the result deterministically.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, replace
from itertools import product
from math import gcd
from typing import Dict, Iterator, Optional, Sequence

from colorama import Fore

from algorithms.canonicity import CANONICAL, NOT_STRICT, CanonicityReport, check_all
from algorithms.cusp import develop_cusp, extract_hexagons
from algorithms.cusp_picture import render_png, render_svg
from algorithms.farey import Slope, reduce
from algorithms.geometry import ShapeAssignment, derive_equations, solve_with_restarts, volume
from algorithms.triangulate import (EXCLUDED_FILLINGS, DiagonalChoice, LinkVariant, SlopeBasis, Triangulation,
                                    assembly_candidates, export_text, validate)
from utils.errors import CanonError, ConstructionError, ExcludedSlope, SolverError
from utils.logger import configure_logging, paint
from utils.settings import DEFAULT_CONVEXITY_TOL, DEFAULT_SOLVER_TOL, UNFILLED_VOLUME, Settings
from utils.slope_parser import parse_slope

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONSTRUCTION = 2
EXIT_SOLVER = 3

VERDICT_COLOURS = {CANONICAL: Fore.GREEN, NOT_STRICT: Fore.YELLOW}


@dataclass(frozen=True)
class RunConfig:
    slope1: Slope
    slope2: Slope
    basis: SlopeBasis = SlopeBasis.INTERNAL
    variant: LinkVariant = LinkVariant.PLAIN
    diagonal: DiagonalChoice = DiagonalChoice.AUTO
    twist_sign: int = 1
    tol: float = DEFAULT_CONVEXITY_TOL
    solver_tol: float = DEFAULT_SOLVER_TOL
    seed: int = 0
    json_path: Optional[str] = None
    svg_path: Optional[str] = None
    png_path: Optional[str] = None
    export_path: Optional[str] = None
    sweep: Optional[int] = None
    log_level: str = "WARNING"

    def __post_init__(self):
        if self.twist_sign not in (1, -1):
            raise ValueError("twist_sign must be +1 or -1.")
        if not self.tol > 0:
            raise ValueError("tol must be positive.")
        if not self.solver_tol > 0:
            raise ValueError("solver_tol must be positive.")


@dataclass(frozen=True)
class PipelineResult:
    triangulation: Triangulation
    shapes: ShapeAssignment
    volume: float
    report: CanonicityReport


# -----------------------
# Pipeline
# -----------------------

def check_slopes(cfg: RunConfig) -> None:
    for m in (cfg.slope1, cfg.slope2):
        if m in EXCLUDED_FILLINGS:
            raise ExcludedSlope(f"Slope {m} is excluded (0, 1/0, 1, -1, 2 and -2 are not admissible).")


def run_pipeline(cfg: RunConfig, settings: Settings) -> PipelineResult:
    """Construction errors and solver failures propagate; see run() for the exit codes."""
    check_slopes(cfg)
    failure: Optional[SolverError] = None
    for attempt, t in enumerate(assembly_candidates(cfg.slope1, cfg.slope2, cfg.diagonal, cfg.variant,
                                                    cfg.basis, cfg.twist_sign)):
        report = validate(t)
        if not report.ok:
            logger.info("candidate %d rejected: %s", attempt, report.violations[0])
            continue
        try:
            shapes = solve_with_restarts(derive_equations(t), tol=cfg.solver_tol, seed=cfg.seed,
                                         restarts=settings.restarts, max_iterations=settings.max_iterations)
        except SolverError as exc:
            logger.info("candidate %d: %s", attempt, exc)
            failure = exc
            continue
        vol = volume(shapes)
        if vol >= UNFILLED_VOLUME:
            logger.warning("volume %.10f is not below the unfilled volume %.10f", vol, UNFILLED_VOLUME)
        return PipelineResult(t, shapes, vol, check_all(t, shapes, cfg.tol, settings.oracle_tol))
    raise failure or SolverError(f"no valid assembly for ({cfg.slope1}, {cfg.slope2})")


# -----------------------
# Report serialization
# -----------------------

def _num(x: float) -> float:
    return float(format(x, ".15g"))


def _complex(z: complex) -> Dict[str, float]:
    return {"re": _num(z.real), "im": _num(z.imag)}


def emit_report(result: PipelineResult, cfg: RunConfig) -> str:
    t, report = result.triangulation, result.report
    tori = t.metadata.tori
    document = {
        "config": {
            "slope1": str(cfg.slope1),
            "slope2": str(cfg.slope2),
            "basis": cfg.basis.value,
            "variant": cfg.variant.value,
            "diagonal": cfg.diagonal.value,
            "twist_sign": cfg.twist_sign,
            "tol": cfg.tol,
            "solver_tol": cfg.solver_tol,
            "seed": cfg.seed,
        },
        "tet_count": t.tet_count,
        "tori": [
            {
                "kind": info.kind.value,
                "slope": str(info.slope),
                "filling": str(info.filling) if info.filling is not None else None,
                "walk_length": info.walk_length,
                "frame": [list(row) for row in info.frame],
                "diagonal": info.diagonal,
            }
            for info in tori
        ],
        "restart": result.shapes.restart,
        "shapes": [_complex(z) for z in result.shapes.z],
        "volume": _num(result.volume),
        "volume_below_unfilled": result.volume < UNFILLED_VOLUME,
        "faces": [
            {
                "id": list(c.face),
                "partner": list(c.partner),
                "class": c.face_class.value,
                "margin": _num(c.certificate.margin),
                "rho": _num(c.certificate.rho),
                "lambdas": [_num(x) for x in c.certificate.lambdas],
                "residual": _num(c.certificate.residual),
                "corner_spread": _num(c.corner_spread),
                "closed_form": c.closed_form,
                "verdict": c.certificate.verdict,
            }
            for c in report.checks
        ],
        "hexagons": [
            {
                "torus": h.torus,
                "A": _num(h.A),
                "B": _num(h.B),
                "C": _num(h.C),
                "convex": h.convex,
                "angle_convex": h.angle_convex,
                "handedness": _complex(h.handedness),
            }
            for h in report.hexagons
        ],
        "class_counts": report.class_counts,
        "min_margin": _num(report.min_margin),
        "boundary_case": report.boundary_case.value,
        "verdict": report.verdict,
    }
    return json.dumps(document, indent=2) + "\n"


def _write_outputs(result: PipelineResult, cfg: RunConfig) -> None:
    if cfg.json_path:
        with open(cfg.json_path, "w", encoding="utf-8") as handle:
            handle.write(emit_report(result, cfg))
    if cfg.export_path:
        with open(cfg.export_path, "w", encoding="utf-8") as handle:
            handle.write(export_text(result.triangulation))
    if cfg.svg_path or cfg.png_path:
        diagram = develop_cusp(result.triangulation, result.shapes)
        hexagons = extract_hexagons(diagram)
        if cfg.svg_path:
            render_svg(diagram, hexagons, cfg.svg_path)
        if cfg.png_path:
            render_png(diagram, hexagons, output_path=cfg.png_path)


def _summary(result: PipelineResult, cfg: RunConfig) -> str:
    report = result.report
    colour = VERDICT_COLOURS.get(report.verdict, Fore.RED)
    lines = [
        f"({cfg.slope1}, {cfg.slope2}) {cfg.basis.value}: {result.triangulation.tet_count} tetrahedra, "
        f"volume {result.volume:.10f}",
        f"faces {report.class_counts}, {report.boundary_case.value}",
        f"minimum margin {report.min_margin:.6e} -> {paint(report.verdict, colour)}",
    ]
    for c in report.offending():
        lines.append(paint(f"  face {c.face} {c.face_class.value}: {c.certificate.verdict} "
                           f"(margin {c.certificate.margin:.3e})", Fore.RED))
    return "\n".join(lines)


def run(cfg: RunConfig, settings: Optional[Settings] = None) -> int:
    settings = settings or Settings.from_env()
    if cfg.sweep is not None:
        return sweep(cfg, settings)
    try:
        result = run_pipeline(cfg, settings)
        _write_outputs(result, cfg)
    except ConstructionError as exc:
        print(paint(f"construction error: {exc}", Fore.RED), file=sys.stderr)
        return EXIT_CONSTRUCTION
    except (SolverError, CanonError) as exc:
        print(paint(f"solver failure: {exc}", Fore.RED), file=sys.stderr)
        return EXIT_SOLVER
    print(_summary(result, cfg))
    return EXIT_OK


def admissible_slopes(k: int) -> Iterator[Slope]:
    for q in range(1, k + 1):
        for p in range(-k, k + 1):
            if gcd(abs(p), q) == 1:
                m = reduce(p, q)
                if m not in EXCLUDED_FILLINGS:
                    yield m


def sweep(cfg: RunConfig, settings: Settings) -> int:
    slopes = sorted(set(admissible_slopes(cfg.sweep)), key=lambda m: (m.p / m.q, m.q))
    for m1, m2 in product(slopes, slopes):
        if (m1.p / m1.q, m1.q) > (m2.p / m2.q, m2.q):
            continue
        single = replace(cfg, slope1=m1, slope2=m2, json_path=None, svg_path=None, png_path=None,
                         export_path=None, sweep=None)
        try:
            result = run_pipeline(single, settings)
            line = f"{result.report.verdict} (min margin {result.report.min_margin:.3e})"
        except ConstructionError as exc:
            line = paint(f"construction error: {exc}", Fore.YELLOW)
        except (SolverError, CanonError) as exc:
            line = paint(f"solver failure: {exc}", Fore.RED)
        print(f"{str(m1):>6} {str(m2):>6}  {line}")
    return EXIT_OK


# -----------------------
# Argument parsing
# -----------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="borromean-canon",
                                     description="Canonicity of Dehn fillings of the Borromean rings.")
    commands = parser.add_subparsers(dest="command", required=True)
    verify = commands.add_parser("verify", help="build, solve and check one slope pair")
    verify.add_argument("--slope1", help="filling slope p/q of the first crossing circle")
    verify.add_argument("--slope2", help="filling slope p/q of the second crossing circle")
    verify.add_argument("--basis", choices=[b.value for b in SlopeBasis], default=SlopeBasis.INTERNAL.value)
    verify.add_argument("--variant", choices=[v.value for v in LinkVariant], default=LinkVariant.PLAIN.value)
    verify.add_argument("--diagonal", choices=[d.value for d in DiagonalChoice], default=DiagonalChoice.AUTO.value)
    verify.add_argument("--twist-sign", type=int, choices=(1, -1), default=1)
    verify.add_argument("--tol", type=float, default=None, help="flat-margin tolerance (default 1e-8)")
    verify.add_argument("--solver-tol", type=float, default=None, help="Newton residual tolerance (default 1e-10)")
    verify.add_argument("--seed", type=int, default=None, help="solver restart seed (default: CANON_SEED)")
    verify.add_argument("--json", dest="json_path")
    verify.add_argument("--svg", dest="svg_path")
    verify.add_argument("--png", dest="png_path")
    verify.add_argument("--export-tri", dest="export_path")
    verify.add_argument("--sweep", type=int, default=None, help="check every admissible pair with |p|, q <= K")
    verify.add_argument("--log-level", default=None)
    return parser


def config_from_args(args: argparse.Namespace, settings: Settings) -> RunConfig:
    if args.sweep is None and (args.slope1 is None or args.slope2 is None):
        raise ValueError("--slope1 and --slope2 are required unless --sweep is given.")
    placeholder = reduce(1, 3)
    return RunConfig(
        slope1=parse_slope(args.slope1) if args.slope1 else placeholder,
        slope2=parse_slope(args.slope2) if args.slope2 else placeholder,
        basis=SlopeBasis(args.basis),
        variant=LinkVariant(args.variant),
        diagonal=DiagonalChoice(args.diagonal),
        twist_sign=args.twist_sign,
        tol=settings.convexity_tol if args.tol is None else args.tol,
        solver_tol=settings.solver_tol if args.solver_tol is None else args.solver_tol,
        seed=settings.seed if args.seed is None else args.seed,
        json_path=args.json_path,
        svg_path=args.svg_path,
        png_path=args.png_path,
        export_path=args.export_path,
        sweep=args.sweep,
        log_level=args.log_level or settings.log_level,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = Settings.from_env()
    try:
        cfg = config_from_args(args, settings)
    except ValueError as exc:
        print(paint(f"invalid arguments: {exc}", Fore.RED), file=sys.stderr)
        return EXIT_CONSTRUCTION
    configure_logging(cfg.log_level)
    return run(cfg, settings)


# Main Execution
if __name__ == "__main__":
    sys.exit(main())


"""
    Summary:
    Command-line front end for the Borromean filling canonicity pipeline.
    Key features:
    - Slope parsing, basis / variant / diagonal options and a seeded solver.
    - Candidate retry: the next frame pair is tried when the solver fails.
    - Deterministic JSON (15 significant digits), SVG/PNG cusp pictures, triangulation export.
    - Coloured summary and an optional sweep over small slopes.
    Core flow:
    - main -> config_from_args -> run -> run_pipeline -> emit_report
    Dependencies:
    - colorama (via utils.logger), Pillow (via cusp_picture)
"""
