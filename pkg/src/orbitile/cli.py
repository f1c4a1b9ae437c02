"""Command-line surface.

Exit codes: 0 success, 1 validation failure (a machine-readable report is
printed to standard output), 2 usage errors, 3 an undecidable comparison
or a degenerate offset.  All subcommand flags can also be supplied through
a TOML config file passed with --config; explicit flags win.
"""

from __future__ import annotations

import argparse
import random
import sys as _sys
from fractions import Fraction
from pathlib import Path

from . import jsonio
from .config import TIE_LEFT, TIE_RAISE, set_bit_budget
from .errors import (DegenerateOffset, IndeterminateComparison, OrbitileError,
                     ParseError)
from .substitution import (Commensurate, IncommensurateUpTo, distribution,
                           growth_minpoly, growth_rate, is_expansive,
                           is_primitive, parse_system, substitution_matrix)

DISPLAY = jsonio.DISPLAY_DIGITS


def _fraction(text: str) -> Fraction:
    """Exact rational from 'p/q' or decimal text (decimals are converted
    exactly, with a warning, so downstream decisions stay exact)."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        if "." in text or "e" in text or "E" in text:
            value = Fraction(text)
            print(f"note: decimal offset {text} converted to exact {value}",
                  file=_sys.stderr)
            return value
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _load_system(path: str):
    return parse_system(Path(path).read_text())


def _emit(document: dict, out: str | None):
    text = jsonio.dumps(document)
    if out:
        Path(out).write_text(text)
    else:
        _sys.stdout.write(text)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        import tomllib
    except ImportError:  # Python 3.10
        import tomli as tomllib
    with open(path, "rb") as handle:
        return tomllib.load(handle)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitile",
        description="substitution systems, overlay orbit windows, and "
                    "surface-graph tooling")
    parser.add_argument("--config", help="TOML file with default flag values")
    parser.add_argument("--bits", type=int, help="precision budget override")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="matrix, spectra and weights of a system")
    p.add_argument("system")

    p = sub.add_parser("compat", help="commensurability verdict for two systems")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--bound", type=int, default=20)

    p = sub.add_parser("alphabet", help="enumerate the overlay alphabet")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--slack", type=_fraction, default=None)
    p.add_argument("-o", "--output")

    p = sub.add_parser("orbit", help="build a base or overlay orbit window")
    p.add_argument("first")
    p.add_argument("second", nargs="?")
    p.add_argument("--rows", type=int, default=8)
    p.add_argument("--c", type=_fraction, default=Fraction(1, 10))
    p.add_argument("--d", type=_fraction, default=Fraction(1, 20))
    p.add_argument("--width", type=int, default=120)
    p.add_argument("--tie", choices=[TIE_RAISE, TIE_LEFT], default=TIE_RAISE)
    p.add_argument("--skip-validation", action="store_true")
    p.add_argument("-o", "--output")

    p = sub.add_parser("graph", help="orbit graph patch of a window")
    p.add_argument("window")
    p.add_argument("--reduce", action="store_true")
    p.add_argument("--check-pq", nargs=2, type=int, metavar=("P", "Q"))
    p.add_argument("-o", "--output")

    p = sub.add_parser("reconstruct", help="recover rows/columns/parents from labels")
    p.add_argument("patch")

    p = sub.add_parser("family", help="collect a neighborhood-pattern family")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--b", help="second-system file (default 0 -> 00)")
    p.add_argument("--windows", default="heights=6;offsets=3;width=160;seed=0",
                   help="spec: heights=6,7;offsets=3;width=160;seed=0")
    p.add_argument("-o", "--output")

    p = sub.add_parser("member", help="membership verdicts for a labeled patch")
    p.add_argument("patch")
    p.add_argument("family")

    p = sub.add_parser("render", help="SVG tiling of a window")
    p.add_argument("window")
    p.add_argument("--overlay", help="second window drawn stroke-only")
    p.add_argument("--c", type=_fraction, default=Fraction(0))
    p.add_argument("--d", type=_fraction, default=Fraction(0))
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("periods", help="vertical periods visible in a window")
    p.add_argument("window")
    p.add_argument("--max-pi", type=int, default=4)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        for key, value in config.items():
            key = key.replace("-", "_")
            if hasattr(args, key) and parser.get_default(key) == getattr(args, key):
                setattr(args, key, value)
        if args.bits:
            set_bit_budget(int(args.bits))
        return _dispatch(args)
    except (IndeterminateComparison, DegenerateOffset) as exc:
        print(jsonio.dumps({"error": type(exc).__name__, "message": str(exc)}),
              end="")
        return 3
    except OrbitileError as exc:
        print(jsonio.dumps({"error": type(exc).__name__, "message": str(exc)}),
              end="")
        return 1
    finally:
        set_bit_budget(None)


def _dispatch(args) -> int:
    return {
        "analyze": _cmd_analyze,
        "compat": _cmd_compat,
        "alphabet": _cmd_alphabet,
        "orbit": _cmd_orbit,
        "graph": _cmd_graph,
        "reconstruct": _cmd_reconstruct,
        "family": _cmd_family,
        "member": _cmd_member,
        "render": _cmd_render,
        "periods": _cmd_periods,
    }[args.command](args)


def _cmd_analyze(args) -> int:
    sys = _load_system(args.system)
    doc = {"name": sys.name,
           "alphabet": list(sys.alphabet),
           "matrix": [list(row) for row in substitution_matrix(sys)],
           "primitive": is_primitive(sys)}
    doc["expansive"] = is_expansive(sys) if doc["primitive"] else None
    if doc["primitive"] and doc["expansive"]:
        lam = growth_rate(sys)
        exact = lam.exact_rational()
        doc["growth_rate"] = {
            "decimal": lam.decimal(DISPLAY),
            "exact_rational": str(exact) if exact is not None else None,
            "minimal_polynomial": [str(c) for c in growth_minpoly(sys)],
        }
        dist = distribution(sys)
        doc["distribution"] = {
            letter: {"decimal": value.decimal(DISPLAY),
                     "exact_rational":
                         str(value.exact_rational())
                         if value.exact_rational() is not None else None}
            for letter, value in dist.weights}
    _emit(doc, None)
    return 0


def _cmd_compat(args) -> int:
    a = _load_system(args.first)
    b = _load_system(args.second)
    from .overlay import compute_K
    from .substitution import incommensurate

    verdict = incommensurate(a, b, args.bound)
    if isinstance(verdict, Commensurate):
        payload = {"kind": "Commensurate", "m": verdict.m, "n": verdict.n}
    elif isinstance(verdict, IncommensurateUpTo):
        payload = {"kind": "IncommensurateUpTo", "bound": verdict.bound}
    else:
        payload = {"kind": "Indeterminate", "reason": verdict.reason}
    doc = {"verdict": payload,
           "K": compute_K(growth_rate(a), growth_rate(b))}
    _emit(doc, None)
    return 0


def _cmd_alphabet(args) -> int:
    from .overlay import enumerate_alphabet
    from .config import DEFAULT_SCALING_SLACK

    a = _load_system(args.first)
    b = _load_system(args.second)
    ov = enumerate_alphabet(a, b, args.slack or DEFAULT_SCALING_SLACK)
    _emit(jsonio.alphabet_doc(ov), args.output)
    return 0


def _cmd_orbit(args) -> int:
    from .orbit import (build_overlay_orbit, seed_orbit, validate_base_window,
                        validate_overlay_window)
    from .overlay import enumerate_alphabet

    first = _load_system(args.first)
    if args.second is None:
        window = seed_orbit(first, args.rows, width_hint=args.width)
        problems = [] if args.skip_validation else validate_base_window(window)
    else:
        second = _load_system(args.second)
        ov = enumerate_alphabet(first, second)
        base = seed_orbit(first, args.rows + 1, width_hint=args.width)
        side = None
        if len(second.alphabet) > 1:
            depth = max(16, 4 * args.rows)
            side = seed_orbit(second, depth, width_hint=max(args.width * 4, 480))
        window = build_overlay_orbit(ov, base, side, args.c, args.d, tie=args.tie)
        problems = [] if args.skip_validation else \
            validate_overlay_window(window, samples=100, rng=random.Random(0))
    if problems:
        _emit({"valid": False, "problems": problems}, None)
        return 1
    _emit(jsonio.window_doc(window), args.output)
    return 0


def _cmd_graph(args) -> int:
    from .graph import build_orbit_graph, check_pq, reduce_patch
    from .pq import surface_letter

    window = jsonio.window_from_doc(jsonio.loads(Path(args.window).read_text()))
    patch = build_orbit_graph(window)
    if args.reduce:
        patch = reduce_patch(patch, surface_letter)
    doc = jsonio.patch_doc(patch)
    if args.check_pq:
        p, q = args.check_pq
        report = check_pq(patch, p, q)
        doc["check_pq"] = {
            "p": p, "q": q, "ok": report.ok, "vacuous": report.vacuous,
            "checked_vertices": report.checked_vertices,
            "checked_faces": report.checked_faces,
            "degree_violations": [[list(v), deg]
                                  for v, deg in report.degree_violations],
            "face_violations": [[list(v), size]
                                for v, size in report.face_violations],
        }
        if not report.ok:
            _emit(doc, args.output)
            return 1
    _emit(doc, args.output)
    return 0


def _cmd_reconstruct(args) -> int:
    from .pq import pq_substitution, reconstruct_rows

    patch = jsonio.patch_from_doc(jsonio.loads(Path(args.patch).read_text()))
    p, q = _infer_pq(patch)
    rec = reconstruct_rows(patch, pq_substitution(p, q), p, q)
    origin = min(rec.vertices)
    rows_ok = all(rec.y[v] - rec.y[origin] == v[0] - origin[0]
                  for v in rec.vertices)
    by_row: dict = {}
    for v in rec.vertices:
        by_row.setdefault(v[0], []).append(v)
    cols_ok = all(len({rec.x[v] - v[1] for v in vs}) == 1
                  for vs in by_row.values())
    doc = {"p": p, "q": q,
           "vertices": len(rec.vertices),
           "rows_match_ground_truth": rows_ok,
           "columns_match_up_to_offset": cols_ok,
           "parents_recovered": len(rec.parent),
           "y": {f"{v[0]},{v[1]}": rec.y[v] for v in sorted(rec.vertices)},
           "x": {f"{v[0]},{v[1]}": rec.x[v] for v in sorted(rec.vertices)},
           "parent_column": {f"{v[0]},{v[1]}": col
                             for v, col in sorted(rec.parent_column.items())}}
    _emit(doc, None)
    return 0 if rows_ok and cols_ok else 1


def _infer_pq(patch) -> tuple[int, int]:
    """Face size and interior degree of a reduced surface patch."""
    from .graph import check_pq

    faces = [f for f in patch.faces()]
    if not faces:
        raise ParseError("patch has no faces to infer p from")
    interior = patch.interior(1)
    candidates = sorted({len(f) for f in faces if all(v in interior for v in f)})
    degrees = sorted({patch.degree(v) for v in interior})
    if len(candidates) != 1 or len(degrees) != 1:
        raise ParseError(
            f"cannot infer (p, q): faces {candidates}, degrees {degrees}")
    return candidates[0], degrees[0]


def _parse_windows_spec(spec: str) -> dict:
    out = {"heights": (6,), "offsets": 3, "width": 160, "seed": 0}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        key = key.strip()
        if key == "heights":
            out["heights"] = tuple(int(x) for x in value.split(","))
        elif key in ("offsets", "width", "seed"):
            out[key] = int(value)
        else:
            raise ParseError(f"unknown windows-spec key {key!r}")
    return out


def _cmd_family(args) -> int:
    from .pq import collect_pattern_family

    spec = _parse_windows_spec(args.windows)
    sysB = _load_system(args.b) if args.b else None
    family = collect_pattern_family(args.p, args.q, sysB, **spec)
    _emit(jsonio.family_doc(family), args.output)
    return 0


def _cmd_member(args) -> int:
    from .pq import FAIL, check_membership

    patch = jsonio.patch_from_doc(jsonio.loads(Path(args.patch).read_text()))
    family = jsonio.family_from_doc(jsonio.loads(Path(args.family).read_text()))
    report = check_membership(patch, family)
    counts = report.counts()
    doc = {"counts": counts,
           "verdicts": {f"{v[0]},{v[1]}": verdict
                        for v, verdict in sorted(report.verdicts.items())},
           "reasons": {f"{v[0]},{v[1]}": reason
                       for v, reason in sorted(report.reasons.items())}}
    _emit(doc, None)
    return 1 if counts[FAIL] else 0


def _cmd_render(args) -> int:
    from .render import (render_tiling, tiling_cells, verify_cell_geometry,
                         verify_parent_extents)

    window = jsonio.window_from_doc(jsonio.loads(Path(args.window).read_text()))
    overlay = None
    if args.overlay:
        overlay = jsonio.window_from_doc(
            jsonio.loads(Path(args.overlay).read_text()))
    cells = tiling_cells(window, args.c, args.d)
    problems = verify_cell_geometry(cells) + verify_parent_extents(window, cells)
    if overlay is not None:
        over_cells = tiling_cells(overlay, args.c, args.d)
        problems += verify_cell_geometry(over_cells)
        problems += verify_parent_extents(overlay, over_cells)
    if problems:
        _emit({"valid": False, "problems": problems}, None)
        return 1
    svg = render_tiling(window, args.c, args.d, overlay=overlay)
    Path(args.output).write_text(svg)
    _emit({"written": args.output, "tiles": sum(len(r) for r in cells)}, None)
    return 0


def _cmd_periods(args) -> int:
    from .orbit import period_search

    window = jsonio.window_from_doc(jsonio.loads(Path(args.window).read_text()))
    found = period_search(window, args.max_pi)
    doc = {"max_pi": args.max_pi,
           "candidates": [{"pi": c.pi, "shifts": list(c.shifts),
                           "overlap": c.overlap} for c in found]}
    _emit(doc, None)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
