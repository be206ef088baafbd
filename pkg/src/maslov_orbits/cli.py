"""Command-line interface: point queries, region maps, verification runs and orbit reports.

Exit codes
----------
0   success
1   a computed check failed (verification disagreement, orbit left the domain)
2   inadmissible model point
3   point lies on a separatrix (the report is still printed)
64  usage error
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .campaign import default_jobs, parallel_map, run_campaign
from .closed_form import closed_form_iota1
from .dynamics import circular_state, floquet, integrate_el, monodromy, ELState
from .errors import DomainError, EscapedDomainError, InvalidArgument
from .maslov import fundamental_solution, iota1
from .surface import ModelPoint, SurfaceKind, boundary_curves, orbit_data, region_classify
from .symplectic import symplectic_defect

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INADMISSIBLE = 2
EXIT_BOUNDARY = 3
EXIT_USAGE = 64

#: Fill colours for index values -1, 0, 1, ..., 6 (larger indices wrap around).
PALETTE = ["#7f7f7f", "#4e79a7", "#f28e2b", "#59a14f", "#e15759",
           "#b07aa1", "#edc948", "#76b7b2"]
INADMISSIBLE_FILL = "#ffffff"

REGION_COLUMNS = ["xi", "alpha", "region", "iota1", "k", "d_sign", "cdb2_sign", "stability"]
TRAJECTORY_COLUMNS = ["t", "xi", "theta", "xidot", "thetadot", "angmom"]
INDEX_COLUMNS = ["surface", "xi", "alpha", "a", "b", "c", "d", "T", "d_sign", "subcase", "k",
                 "iota1", "region", "boundary", "stability", "model_feasible",
                 "oracle_iota1", "agreement"]


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with the usage code 64 on bad flags."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _color(text: str, code: str, stream) -> str:
    if os.environ.get("NO_COLOR") or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\033[{code}m{text}\033[0m"


def _status(message: str, ok: bool = True):
    print(_color(message, "32" if ok else "31", sys.stderr), file=sys.stderr)


def _range(text: str) -> Tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise argparse.ArgumentTypeError(f"range must satisfy a < b, got {text!r}")
    return lo, hi


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"expected a finite real number, got {text!r}")
    return value


def _json_dump(obj, stream):
    json.dump(obj, stream, indent=2, sort_keys=False)
    stream.write("\n")


# --------------------------------------------------------------------------- #
# index
# --------------------------------------------------------------------------- #

def query_report(surface: str, xi: float, alpha: float, verify: bool = False) -> dict:
    """Full report for one model point; raises ``DomainError`` if inadmissible."""
    point = ModelPoint(SurfaceKind(surface), xi, alpha)
    orbit = orbit_data(point)
    label = region_classify(point)
    a, b, c, d = orbit.coeffs
    closed, tag = closed_form_iota1(a, b, c, d, orbit.T)
    oracle = agreement = None
    if verify:
        oracle = iota1(fundamental_solution(orbit.generator, orbit.T)).iota1
        agreement = oracle == label.index
    return {
        "surface": point.surface.value,
        "xi": xi,
        "alpha": alpha,
        "coeffs": {"a": a, "b": b, "c": c, "d": d},
        "T": orbit.T,
        "case_tag": {"d_sign": tag.d_sign.value, "subcase": tag.subcase.value},
        "k": label.k,
        "iota1": label.index,
        "region": label.name,
        "boundary": label.boundary,
        "stability": label.stability.value,
        "model_feasible": tag.model_feasible,
        "oracle_iota1": oracle,
        "agreement": agreement,
    }


def cmd_index(args) -> int:
    try:
        report = query_report(args.surface, args.xi, args.alpha, verify=args.verify)
    except DomainError as exc:
        print(f"inadmissible point: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    if args.csv:
        row = dict(report)
        row.update(report["coeffs"])
        row.update(report["case_tag"])
        writer = csv.DictWriter(sys.stdout, INDEX_COLUMNS, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    else:
        _json_dump(report, sys.stdout)
    if report["agreement"] is False:
        _status("closed form and numerical oracle disagree", ok=False)
        return EXIT_CHECK_FAILED
    if report["boundary"] is not None:
        _status(f"point lies on the {report['boundary']} separatrix", ok=False)
        return EXIT_BOUNDARY
    return EXIT_OK


# --------------------------------------------------------------------------- #
# regions
# --------------------------------------------------------------------------- #

def _centers(lo: float, hi: float, n: int) -> np.ndarray:
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def _classify_row(task) -> List[dict]:
    surface, alpha, xis = task
    out = []
    for xi in xis:
        row = {"xi": float(xi), "alpha": float(alpha)}
        try:
            label = region_classify(ModelPoint(SurfaceKind(surface), float(xi), float(alpha)))
        except DomainError:
            row.update(region="inadmissible", iota1=None, k=None, d_sign=None, cdb2_sign=None, stability=None)
        else:
            row.update(region=label.name, iota1=label.index, k=label.k, d_sign=label.d_sign,
                       cdb2_sign=label.cdb2_sign, stability=label.stability.value)
        out.append(row)
    return out


def region_grid(surface: str, xi_range, alpha_range, nx: int, na: int, jobs: Optional[int] = None) -> List[dict]:
    """Classify the cell centres of an ``nx`` by ``na`` grid, row by row in increasing alpha."""
    xis = _centers(*xi_range, nx)
    alphas = _centers(*alpha_range, na)
    rows = parallel_map(_classify_row, [(surface, al, xis) for al in alphas], jobs, chunksize=4)
    return [cell for row in rows for cell in row]


def write_region_csv(cells: Sequence[dict], stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(REGION_COLUMNS)
    for cell in cells:
        writer.writerow(["" if cell[c] is None else (repr(cell[c]) if isinstance(cell[c], float) else cell[c])
                         for c in REGION_COLUMNS])


def _fill(index: Optional[int]) -> str:
    if index is None:
        return INADMISSIBLE_FILL
    return PALETTE[(index + 1) % len(PALETTE)]


def render_region_svg(surface: str, cells: Sequence[dict], xi_range, alpha_range, nx: int, na: int,
                      curves=None, width: int = 640, height: int = 480) -> str:
    """SVG 1.1 map with one rectangle per grid cell, separatrices and a legend."""
    margin, legend_w = 50, 150
    (x0, x1), (a0, a1) = xi_range, alpha_range
    cw, ch = width / nx, height / na

    def px(xi):
        return margin + (xi - x0) / (x1 - x0) * width

    def py(al):
        return margin + height - (al - a0) / (a1 - a0) * height

    out = io.StringIO()
    total_w, total_h = width + 2 * margin + legend_w, height + 2 * margin
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total_w}" '
              f'height="{total_h}" viewBox="0 0 {total_w} {total_h}">\n')
    out.write(f'<title>{surface} index regions</title>\n<g shape-rendering="crispEdges">\n')
    for n, cell in enumerate(cells):
        i, j = n % nx, n // nx
        x, y = margin + i * cw, margin + height - (j + 1) * ch
        out.write(f'<rect x="{x:.3f}" y="{y:.3f}" width="{cw:.3f}" height="{ch:.3f}" '
                  f'fill="{_fill(cell["iota1"])}"/>\n')
    out.write("</g>\n")
    for curve in curves or []:
        pts = " ".join(f"{px(xi):.3f},{py(al):.3f}" for xi, al in curve.points)
        if pts:
            out.write(f'<polyline fill="none" stroke="#000000" stroke-width="1.2" points="{pts}">'
                      f'<title>{curve.name}</title></polyline>\n')
    out.write(f'<rect x="{margin}" y="{margin}" width="{width}" height="{height}" '
              f'fill="none" stroke="#000000"/>\n')
    font = 'font-family="sans-serif" font-size="12"'
    out.write(f'<text x="{margin + width / 2}" y="{total_h - 12}" text-anchor="middle" {font}>xi</text>\n')
    out.write(f'<text x="14" y="{margin + height / 2}" text-anchor="middle" {font} '
              f'transform="rotate(-90 14 {margin + height / 2})">alpha</text>\n')
    for value, anchor, x, y in [(x0, "start", margin, margin + height + 16),
                                (x1, "end", margin + width, margin + height + 16)]:
        out.write(f'<text x="{x}" y="{y}" text-anchor="{anchor}" {font}>{value:g}</text>\n')
    for value, y in [(a0, margin + height), (a1, margin + 10)]:
        out.write(f'<text x="{margin - 4}" y="{y}" text-anchor="end" {font}>{value:g}</text>\n')
    present = sorted({c["iota1"] for c in cells if c["iota1"] is not None})
    lx = margin + width + 20
    out.write(f'<text x="{lx}" y="{margin + 4}" {font}>Morse index</text>\n')
    for n, index in enumerate(present):
        y = margin + 16 + 22 * n
        out.write(f'<rect class="legend" x="{lx}" y="{y}" width="16" height="16" fill="{_fill(index)}" '
                  f'stroke="#000000"/>\n')
        out.write(f'<text x="{lx + 24}" y="{y + 13}" {font}>{index}</text>\n')
    out.write("</svg>\n")
    return out.getvalue()


def cmd_regions(args) -> int:
    if args.nx < 1 or args.na < 1:
        print("grid sizes must be positive", file=sys.stderr)
        return EXIT_USAGE
    surface = args.surface
    cells = region_grid(surface, args.xi_range, args.alpha_range, args.nx, args.na, args.jobs)
    curves = boundary_curves(surface, args.xi_range, args.alpha_range, resolution=max(16, 2 * max(args.nx, args.na)))
    with open(f"{args.out}.csv", "w", encoding="utf-8", newline="") as fh:
        write_region_csv(cells, fh)
    with open(f"{args.out}.svg", "w", encoding="utf-8") as fh:
        fh.write(render_region_svg(surface, cells, args.xi_range, args.alpha_range, args.nx, args.na, curves))
    present = sorted({c["iota1"] for c in cells if c["iota1"] is not None})
    _status(f"regions: {len(cells)} cells, indices present {present}; wrote {args.out}.csv and {args.out}.svg")
    return EXIT_OK


# --------------------------------------------------------------------------- #
# verify
# --------------------------------------------------------------------------- #

def cmd_verify(args) -> int:
    start = time.perf_counter()
    report = run_campaign(args.samples, args.seed, args.guard, args.jobs)
    elapsed = time.perf_counter() - start
    _json_dump(report.to_dict(), sys.stdout)
    _status(f"verify: {report.agreements}/{report.total} agree "
            f"({report.drawn - report.total} excluded by the guard band) in {elapsed:.1f} s",
            ok=report.passed)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


# --------------------------------------------------------------------------- #
# orbit
# --------------------------------------------------------------------------- #

def _complex_pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


def cmd_orbit(args) -> int:
    point = ModelPoint(SurfaceKind(args.surface), args.xi, args.alpha)
    try:
        orbit = orbit_data(point)
    except DomainError as exc:
        print(f"inadmissible point: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    state0 = circular_state(point)
    if args.radial:
        state0 = ELState(state0.xi, 0.0, 0.0, 0.0)
    steps = args.periods * args.steps_per_period
    escaped = False
    try:
        traj = integrate_el(point.surface, point.alpha, state0, args.periods * orbit.T, steps)
    except EscapedDomainError as exc:
        traj, escaped = exc.trajectory, True
    with open(f"{args.out}_trajectory.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for t, s, L in zip(traj.times, traj.states, traj.angular_momentum):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in s] + [repr(float(L))])
    M = monodromy(orbit.generator, orbit.T)
    fl = floquet(M)
    summary = {
        "surface": point.surface.value,
        "xi": point.xi,
        "alpha": point.alpha,
        "T": orbit.T,
        "coeffs": dict(zip("abcd", orbit.coeffs)),
        "monodromy": M.tolist(),
        "symplectic_defect": symplectic_defect(M),
        "multipliers": [_complex_pair(z) for z in fl.multipliers],
        "spectral_radius": fl.spectral_radius,
        "floquet_tag": fl.tag.value,
        "periods": args.periods,
        "steps_per_period": args.steps_per_period,
        "initial_state": "radial" if args.radial else "circular",
        "escaped": escaped,
        "radial_drift": traj.radial_drift(point.xi),
        "angular_momentum_drift": traj.angular_momentum_drift if not args.radial else
        float(np.max(np.abs(traj.angular_momentum))),
        "energy_drift": float(np.ptp(traj.energy)),
    }
    with open(f"{args.out}_monodromy.json", "w", encoding="utf-8") as fh:
        _json_dump(summary, fh)
    _status(f"orbit: radial drift {summary['radial_drift']:.3e}, angular momentum drift "
            f"{summary['angular_momentum_drift']:.3e}, Floquet tag {fl.tag.value}", ok=not escaped)
    if escaped:
        _status("trajectory left the surface domain; partial trajectory written", ok=False)
        return EXIT_CHECK_FAILED
    return EXIT_OK


# --------------------------------------------------------------------------- #
# entry point
# --------------------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maslov-orbits", description=__doc__.splitlines()[0],
                     epilog="Ranges starting with a minus sign need '=': --alpha-range=-3:0")
    sub = parser.add_subparsers(dest="command", required=True)
    surfaces = [k.value for k in SurfaceKind]

    p = sub.add_parser("index", help="index, region and stability of one circular orbit")
    p.add_argument("--surface", required=True, choices=surfaces)
    p.add_argument("--xi", required=True, type=_finite)
    p.add_argument("--alpha", required=True, type=_finite)
    p.add_argument("--verify", action="store_true", help="also run the numerical crossing count")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON report (default)")
    fmt.add_argument("--csv", action="store_true", help="one-row CSV report")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("regions", help="classify a parameter grid; write CSV and SVG")
    p.add_argument("--surface", required=True, choices=surfaces)
    p.add_argument("--xi-range", required=True, type=_range)
    p.add_argument("--alpha-range", required=True, type=_range)
    p.add_argument("--nx", type=_positive_int, default=200)
    p.add_argument("--na", type=_positive_int, default=200)
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--jobs", type=_positive_int, default=default_jobs())
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("verify", help="seeded closed form versus numerical oracle campaign")
    p.add_argument("--samples", type=_nonneg_int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--guard", type=_finite, default=1e-6)
    p.add_argument("--jobs", type=_positive_int, default=default_jobs())
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("orbit", help="integrate a circular orbit; write trajectory and monodromy")
    p.add_argument("--surface", required=True, choices=surfaces)
    p.add_argument("--xi", required=True, type=_finite)
    p.add_argument("--alpha", required=True, type=_finite)
    p.add_argument("--periods", type=_positive_int, default=3)
    p.add_argument("--steps-per-period", type=_positive_int, default=2048)
    p.add_argument("--radial", action="store_true", help="start at rest instead of on the circular orbit")
    p.add_argument("--out", required=True, help="output prefix")
    p.set_defaults(func=cmd_orbit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "guard", 0.0) < 0:
        parser.error("--guard must be non-negative")
    try:
        return args.func(args)
    except InvalidArgument as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
