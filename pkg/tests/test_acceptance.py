"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every tolerance is pinned here, not configured elsewhere.
"""

import json
import math
import random
import time
from fractions import Fraction
from pathlib import Path

import pytest

from oracles import brute_growth_estimate, oracle_alphabet
from orbitile.cli import main as cli_main
from orbitile.graph import (GraphPatch, build_orbit_graph, check_pq,
                            pattern_candidates, reduce_patch)
from orbitile.orbit import (build_overlay_orbit, period_search, seed_orbit,
                            validate_overlay_window)
from orbitile.overlay import enumerate_alphabet
from orbitile.pq import (FAIL, PASS, UNKNOWN, base_of_label,
                         check_membership, collect_pattern_family,
                         count_horizontal_paths, decorate, overlay_for_surface,
                         pq_substitution, reconstruct_rows, surface_letter,
                         _oriented)
from orbitile.render import tiling_cells, render_tiling, verify_cell_geometry, \
    verify_parent_extents
from orbitile.substitution import (Commensurate, apply, distribution,
                                   growth_rate, image_length, make_system,
                                   nu_length)

SYSTEMS = {
    "bin": {"0": "00"},
    "tri": {"0": "000"},
    "quad": {"0": "0000"},
    "fib": {"a": "ab", "b": "a"},
    "abaab": {"A": "AB", "B": "AAB"},
}


def _report(number, ok, detail):
    print(f"[criterion {number:02d}] {'PASS' if ok else 'FAIL'} - {detail}")


def _sys(name):
    return make_system(name, SYSTEMS[name])


@pytest.fixture(scope="module")
def ov_unit():
    return enumerate_alphabet(_sys("tri"), _sys("bin"))


@pytest.fixture(scope="module")
def surface55():
    ov, base = overlay_for_surface(5, 5)
    return ov, base


def test_criterion_01_growth_rates(tmp_path, capsys):
    cases = [
        ("bin", SYSTEMS["bin"], 2.0, True, ("0", 10, 1e-9)),
        ("fib", SYSTEMS["fib"], (1 + math.sqrt(5)) / 2, False, ("a", 24, 1e-7)),
        ("abaab", SYSTEMS["abaab"], 1 + math.sqrt(2), False, ("A", 15, 1e-8)),
        ("pq55", None, (7 + 3 * math.sqrt(5)) / 2, False, ("Y", 7, 1e-9)),
    ]
    problems = []
    times = []
    for name, rules, expected, exact, (letter, depth, oracle_tol) in cases:
        system = pq_substitution(5, 5) if rules is None else make_system(name, rules)
        path = tmp_path / f"{name}.sys"
        from orbitile.substitution import system_to_text

        path.write_text(system_to_text(system))
        start = time.perf_counter()
        code = cli_main(["analyze", str(path)])
        elapsed = time.perf_counter() - start
        times.append(elapsed)
        doc = json.loads(capsys.readouterr().out)
        if code != 0:
            problems.append(f"{name}: analyze exited {code}")
            continue
        reported = float(doc["growth_rate"]["decimal"])
        if exact and doc["growth_rate"]["exact_rational"] != "2":
            problems.append(f"{name}: expected the exact value 2")
        if abs(reported - expected) > 1e-9:
            problems.append(f"{name}: reported {reported}, expected {expected}")
        estimate = brute_growth_estimate(system.rule_map, letter, depth)
        if abs(estimate - reported) > oracle_tol:
            problems.append(f"{name}: letter-count oracle {estimate} vs {reported}")
        if elapsed > 1.0:
            problems.append(f"{name}: analyze took {elapsed:.2f}s (budget 1s)")
    _report(1, not problems,
            f"4 systems, max {max(times):.2f}s each" if not problems
            else "; ".join(problems))
    assert not problems


def test_criterion_02_eigen_length_identity():
    start = time.perf_counter()
    rng = random.Random(2)
    problems = []
    systems = [_sys("bin"), _sys("fib"), _sys("abaab"), pq_substitution(5, 5)]
    for system in systems:
        dist = distribution(system)
        lam = growth_rate(system)
        for _ in range(200):
            word = tuple(rng.choice(system.alphabet)
                         for _ in range(rng.randint(1, 30)))
            lhs = nu_length(dist, apply(system, word, 1))
            rhs = lam * nu_length(dist, word)
            lo, hi = (lhs - rhs).interval(96)
            magnitude = abs(float(lhs))
            if max(abs(lo), abs(hi)) > 1e-9 * magnitude:
                problems.append(f"{system.name}: identity off at {word}")
                break
    elapsed = time.perf_counter() - start
    if elapsed > 5.0:
        problems.append(f"took {elapsed:.1f}s (budget 5s)")
    _report(2, not problems, f"4 systems x 200 words in {elapsed:.1f}s"
            if not problems else "; ".join(problems))
    assert not problems


def test_criterion_03_theta_growth():
    start = time.perf_counter()
    problems = []
    margin = 1 + Fraction(1, 2 ** 16)
    for system in [_sys("bin"), _sys("fib"), _sys("abaab"), pq_substitution(5, 5)]:
        lam = growth_rate(system)
        ratios = {(letter, k): image_length(system, letter, k) / lam ** k
                  for letter in system.alphabet for k in range(5, 16)}
        bound = None
        for letter in system.alphabet:
            r5 = ratios[(letter, 5)]
            for cand in (r5, 1 / r5):
                if bound is None or cand.compare(bound) > 0:
                    bound = cand
        bound = bound * margin
        inv = 1 / bound
        for (letter, k), ratio in ratios.items():
            if ratio.compare(bound) > 0 or ratio.compare(inv) < 0:
                problems.append(f"{system.name}: bracket broken at ({letter},{k})")
    elapsed = time.perf_counter() - start
    if elapsed > 10.0:
        problems.append(f"took {elapsed:.1f}s (budget 10s)")
    _report(3, not problems, f"brackets k=5..15 hold in {elapsed:.1f}s"
            if not problems else "; ".join(problems))
    assert not problems


def test_criterion_04_alphabet_correctness(ov_unit):
    start = time.perf_counter()
    problems = []
    got = {x.key() for x in ov_unit.letters}
    want = oracle_alphabet(SYSTEMS["tri"], SYSTEMS["bin"])
    if got != want:
        problems.append(f"unit pair: {len(got ^ want)} symmetric differences")
    if ov_unit.find("0", ("0", "0"), (), ("0",), 1) is None:
        problems.append("hand-verified letter missing")
    ov55 = enumerate_alphabet(pq_substitution(5, 5), _sys("bin"))
    if not ov55.letters:
        problems.append("surface alphabet empty")
    bad = sum(1 for x in ov55.letters if not ov55.letter_is_valid(x))
    if bad:
        problems.append(f"{bad} surface letters fail the re-checker")
    elapsed = time.perf_counter() - start
    if elapsed > 120.0:
        problems.append(f"took {elapsed:.1f}s (budget 120s)")
    _report(4, not problems,
            f"unit alphabet == oracle ({len(got)} letters), surface alphabet "
            f"{len(ov55.letters)} letters all valid, {elapsed:.1f}s"
            if not problems else "; ".join(problems))
    assert not problems


def test_criterion_05_orbit_validity(ov_unit):
    start = time.perf_counter()
    rng = random.Random(5)
    problems = []
    base = seed_orbit(ov_unit.sysA, 9, width_hint=120)
    tested = 0
    for _ in range(20):
        c = Fraction(rng.randint(1, 60), 61)
        d = Fraction(rng.randint(1, 60), 61)
        window = build_overlay_orbit(ov_unit, base, None, c, d)
        if window.height < 8:
            problems.append(f"({c},{d}): window only {window.height} rows")
            continue
        found = validate_overlay_window(window, samples=100,
                                        rng=random.Random(tested))
        if found:
            problems.append(f"({c},{d}): {found[0]}")
        tested += 1
    elapsed = time.perf_counter() - start
    if elapsed > 300.0:
        problems.append(f"took {elapsed:.1f}s (budget 300s)")
    _report(5, not problems, f"{tested} offsets, height-8 windows fully "
            f"validated in {elapsed:.1f}s" if not problems
            else "; ".join(problems))
    assert not problems


def test_criterion_06_aperiodicity(ov_unit, capsys, tmp_path):
    start = time.perf_counter()
    problems = []
    # the commensurate control is flagged before any construction
    from orbitile.substitution import system_to_text

    for name in ("bin", "quad"):
        (tmp_path / f"{name}.sys").write_text(system_to_text(_sys(name)))
    code = cli_main(["compat", str(tmp_path / "bin.sys"),
                     str(tmp_path / "quad.sys"), "--bound", "5"])
    doc = json.loads(capsys.readouterr().out)
    if code != 0 or doc["verdict"] != {"kind": "Commensurate", "m": 2, "n": 1}:
        problems.append(f"control verdict wrong: {doc}")

    rng = random.Random(6)
    base_unit = seed_orbit(ov_unit.sysA, 13, width_hint=260)
    ov55 = enumerate_alphabet(pq_substitution(5, 5), _sys("bin"))
    base_55 = seed_orbit(ov55.sysA, 13, width_hint=260)
    tested = 0
    for ov, base in ((ov_unit, base_unit), (ov55, base_55)):
        for _ in range(3):
            c = Fraction(rng.randint(1, 60), 61)
            d = Fraction(rng.randint(1, 60), 61)
            window = build_overlay_orbit(ov, base, None, c, d)
            if window.height < 12:
                problems.append(f"window height {window.height} < 12")
                continue
            candidates = period_search(window, 4)
            if candidates:
                problems.append(
                    f"({ov.sysA.name},{c},{d}): period {candidates[0].pi} survived")
            tested += 1
    elapsed = time.perf_counter() - start
    if elapsed > 300.0:
        problems.append(f"took {elapsed:.1f}s (budget 300s)")
    _report(6, not problems,
            f"{tested} height-12 windows, no period <= 4; control flagged "
            f"Commensurate(2,1); {elapsed:.1f}s"
            if not problems else "; ".join(problems))
    assert not problems


def test_criterion_07_pq_structure():
    start = time.perf_counter()
    problems = []
    for (p, q, width, height) in [(5, 5, 260, 9), (5, 6, 300, 8), (8, 8, 1400, 7)]:
        window = seed_orbit(pq_substitution(p, q), height, width_hint=width)
        patch = reduce_patch(build_orbit_graph(window), surface_letter)
        report = check_pq(patch, p, q)
        if report.vacuous:
            problems.append(f"{{{p},{q}}}: no interior to check")
        if not report.ok:
            problems.append(f"{{{p},{q}}}: {report.degree_violations[:2]} "
                            f"{report.face_violations[:2]}")
    elapsed = time.perf_counter() - start
    if elapsed > 120.0:
        problems.append(f"took {elapsed:.1f}s (budget 120s)")
    _report(7, not problems,
            f"(5,5),(5,6),(8,8) interiors q-regular with p-gonal faces, "
            f"{elapsed:.1f}s" if not problems else "; ".join(problems))
    assert not problems


def test_criterion_08_row_reconstruction():
    start = time.perf_counter()
    problems = []
    base = pq_substitution(5, 5)
    deco = decorate(base)
    for occurrence, width in ((0, 220), (1, 180)):
        window = seed_orbit(deco.reachable, 8, width_hint=width,
                            occurrence=occurrence)
        patch = build_orbit_graph(window)
        red = reduce_patch(patch, base_of_label)
        cycles_checked = 0
        for v in pattern_candidates(red, 5):
            for face in red.faces_through(v):
                if count_horizontal_paths(_oriented(face), red.label, 5, base) != 1:
                    problems.append(f"face {face[0]}: horizontal path not unique")
                cycles_checked += 1
        rec = reconstruct_rows(red, base, 5, 5)
        origin = min(rec.vertices)
        for v in rec.vertices:
            if rec.y[v] - rec.y[origin] != v[0] - origin[0]:
                problems.append(f"row mismatch at {v}")
                break
        by_row = {}
        for v in rec.vertices:
            by_row.setdefault(v[0], []).append(v)
        for vs in by_row.values():
            if len({rec.x[v] - v[1] for v in vs}) != 1:
                problems.append("column offsets inconsistent")
                break
        for v, parent in rec.parent.items():
            truth = red.up.get(v, patch.up.get(v))
            if truth is not None and parent != truth:
                problems.append(f"parent mismatch at {v}")
                break
    elapsed = time.perf_counter() - start
    if elapsed > 120.0:
        problems.append(f"took {elapsed:.1f}s (budget 120s)")
    _report(8, not problems,
            f"reconstruction matches ground truth on 100% of usable vertices, "
            f"{elapsed:.1f}s" if not problems else "; ".join(problems))
    assert not problems


def test_criterion_09_mutation_sensitivity(surface55):
    start = time.perf_counter()
    ov, base = surface55
    problems = []
    family = collect_pattern_family(5, 5, heights=(6,), width=160, offsets=3,
                                    seed=11, ov=ov, base=base)
    rng = random.Random(11)
    c = Fraction(rng.randint(1, 60), 61)
    d = Fraction(rng.randint(1, 60), 61)
    wbase = seed_orbit(ov.sysA, 7, width_hint=160)
    window = build_overlay_orbit(ov, wbase, None, c, d)
    patch = reduce_patch(build_orbit_graph(window), base_of_label)
    baseline = check_membership(patch, family)
    if not baseline.ok:
        problems.append(f"baseline patch does not pass: {baseline.counts()}")
    candidates = pattern_candidates(patch, 5)
    mut_rng = random.Random(909)
    vertices = sorted(patch.vertices)
    for trial in range(50):
        v = candidates[mut_rng.randrange(len(candidates))]
        original = patch.label(v)
        other = ov.letters[mut_rng.randrange(len(ov.letters))]
        while other.key() == original.key():
            other = ov.letters[mut_rng.randrange(len(ov.letters))]
        mutated_vertices = dict(patch.vertices)
        mutated_vertices[v] = other
        mutated = GraphPatch(mutated_vertices, dict(patch.row_range),
                             dict(patch.up), set(patch.complete), reduced=True)
        report = check_membership(mutated, family)
        fails = [u for u, verdict in report.verdicts.items() if verdict == FAIL]
        if not fails:
            problems.append(f"trial {trial}: mutation at {v} produced no FAIL")
            continue
        nearest = min(_graph_distance(mutated, v, u) for u in fails)
        if nearest > 5:
            problems.append(f"trial {trial}: nearest FAIL at distance {nearest}")
    elapsed = time.perf_counter() - start
    if elapsed > 300.0:
        problems.append(f"took {elapsed:.1f}s (budget 300s)")
    _report(9, not problems,
            f"50 mutations each produce a FAIL within distance 5, "
            f"{elapsed:.1f}s" if not problems else "; ".join(problems[:3]))
    assert not problems


def _graph_distance(patch, a, b):
    from collections import deque

    if a == b:
        return 0
    seen = {a: 0}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        for u in patch.neighbors(v):
            if u not in seen:
                seen[u] = seen[v] + 1
                if u == b:
                    return seen[u]
                queue.append(u)
    return math.inf


def test_criterion_10_rendering(ov_unit):
    start = time.perf_counter()
    problems = []
    base = seed_orbit(_sys("bin"), 4, width_hint=24)
    cells = tiling_cells(base, Fraction(1, 10), Fraction(1, 20))
    problems += verify_cell_geometry(cells)
    problems += verify_parent_extents(base, cells)

    wbase = seed_orbit(ov_unit.sysA, 7, width_hint=90)
    overlay_window = build_overlay_orbit(ov_unit, wbase, None,
                                         Fraction(1, 10), Fraction(1, 20))
    over_cells = tiling_cells(overlay_window, Fraction(1, 10), Fraction(1, 20))
    problems += verify_cell_geometry(over_cells)
    problems += verify_parent_extents(overlay_window, over_cells)

    # the two-system overlay in the style of the published figure
    first = seed_orbit(_sys("bin"), 4, width_hint=24)
    second = seed_orbit(_sys("abaab"), 4, width_hint=24)
    svg = render_tiling(first, Fraction(0), Fraction(0), overlay=second)
    if not svg.startswith("<svg") or "<rect" not in svg:
        problems.append("figure-pair overlay render failed")
    elapsed = time.perf_counter() - start
    if elapsed > 30.0:
        problems.append(f"took {elapsed:.1f}s (budget 30s)")
    _report(10, not problems,
            f"abutment within 1e-9 relative; figure-pair overlay rendered, "
            f"{elapsed:.1f}s" if not problems else "; ".join(problems))
    assert not problems
