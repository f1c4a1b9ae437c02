"""Canonical JSON documents for windows, patches, and pattern families.

Dumping is deterministic (sorted keys, compact separators, trailing
newline) and all real-valued display data is carried as decimal strings,
so serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Optional

from .errors import ParseError
from .graph import GraphPatch, Pattern
from .orbit import (BaseRow, BaseWindow, OverlayRow, OverlayWindow,
                    RowGeometry, _ExplicitRows, _UnitRows, row_coordinates)
from .overlay import OverlayLetter, OverlaySystem, scale_distributions
from .pq import PatternFamily
from .precision import AdaptiveReal
from .substitution import (SubstitutionSystem, distribution, growth_rate,
                           make_system)

WINDOW_SCHEMA = "orbitile.window/1"
PATCH_SCHEMA = "orbitile.patch/1"
FAMILY_SCHEMA = "orbitile.family/1"
ALPHABET_SCHEMA = "orbitile.alphabet/1"

DISPLAY_DIGITS = 50


def dumps(document: dict) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":")) + "\n"


def loads(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON document: {exc}")


# ------------------------------------------------------------------- systems

def system_doc(sys: SubstitutionSystem) -> dict:
    return {"name": sys.name,
            "letters": list(sys.alphabet),
            "rules": {letter: list(image) for letter, image in sys.rules}}


def system_from_doc(doc: dict) -> SubstitutionSystem:
    rules = {letter: tuple(doc["rules"][letter]) for letter in doc["letters"]}
    return make_system(doc["name"], rules)


def letter_doc(x: OverlayLetter) -> dict:
    return {"alpha": x.alpha, "beta": list(x.beta), "p": list(x.p),
            "s": list(x.s), "delta": x.delta}


def letter_from_doc(doc: dict) -> OverlayLetter:
    return OverlayLetter(doc["alpha"], tuple(doc["beta"]), tuple(doc["p"]),
                         tuple(doc["s"]), doc["delta"])


def alphabet_doc(ov: OverlaySystem) -> dict:
    return {"schema": ALPHABET_SCHEMA,
            "systems": {"first": system_doc(ov.sysA), "second": system_doc(ov.sysB)},
            "slack": str(ov.slack),
            "K": ov.K, "N": ov.N,
            "letters": [letter_doc(x) for x in ov.letters],
            "weights": {
                "nu": {l: v.decimal(DISPLAY_DIGITS) for l, v in ov.nu.weights},
                "eta": {l: v.decimal(DISPLAY_DIGITS) for l, v in ov.eta.weights},
            }}


def overlay_system_from_doc(doc: dict) -> OverlaySystem:
    """Rebuild an overlay system: spectral data is recomputed exactly from
    the systems, letters are taken from the document."""
    sysA = system_from_doc(doc["systems"]["first"])
    sysB = system_from_doc(doc["systems"]["second"])
    slack = Fraction(doc["slack"])
    lam, gamma = growth_rate(sysA), growth_rate(sysB)
    nu, eta = scale_distributions(distribution(sysA), distribution(sysB),
                                  gamma, slack)
    letters = tuple(letter_from_doc(x) for x in doc["letters"])
    ov = OverlaySystem(sysA, sysB, nu, eta, lam, gamma, doc["K"], letters, slack)
    if ov.N != doc["N"]:
        raise ParseError("alphabet document is inconsistent (N mismatch)")
    return ov


# ------------------------------------------------------------------- windows

def window_doc(window) -> dict:
    if isinstance(window, BaseWindow):
        return _base_window_doc(window)
    if isinstance(window, OverlayWindow):
        return _overlay_window_doc(window)
    raise TypeError(f"cannot serialize {type(window).__name__}")


def _meta_doc(meta: dict) -> dict:
    return {k: v for k, v in meta.items() if isinstance(v, (str, int, bool, float, list))}


def _base_window_doc(window: BaseWindow) -> dict:
    return {
        "schema": WINDOW_SCHEMA,
        "kind": "base",
        "system": system_doc(window.system),
        "rows": [{"i": i, "j_lo": row.j_lo, "letters": list(row.letters)}
                 for i, row in enumerate(window.rows)],
        "parents": [list(par) for par in window.parents],
        "segments": [[lo, hi] for lo, hi in zip(window.seg_lo, window.seg_hi)],
        "metadata": _meta_doc(window.meta),
    }


def base_window_from_doc(doc: dict) -> BaseWindow:
    sys = system_from_doc(doc["system"])
    rows = [BaseRow(r["j_lo"], tuple(r["letters"])) for r in doc["rows"]]
    seg_lo = [seg[0] for seg in doc["segments"]]
    seg_hi = [seg[1] for seg in doc["segments"]]
    return BaseWindow(sys, rows, [list(p) for p in doc["parents"]],
                      seg_lo, seg_hi, dict(doc.get("metadata", {})))


def _overlay_window_doc(window: OverlayWindow) -> dict:
    ov = window.ov
    geometry = {"Delta": [g.Delta for g in window.geometry],
                "delta": [g.delta for g in window.geometry],
                "nabla": [list(g.nabla) for g in window.geometry],
                "U": [], "V": [], "W": []}
    for i, row in enumerate(window.rows):
        xs = row_coordinates(window.base, ov.nu, ov.lam, i)
        off = row.base_off
        geometry["U"].append(
            [xs[off + pos].decimal(DISPLAY_DIGITS)
             for pos in range(len(row.letters) + 1)])
        geo = window.geometry[i]
        vs, ws = [], []
        for nab in geo.nabla:
            v_edge = window.side.x_edge(geo.Delta, nab)
            w_edge = window.side.x_edge(geo.Delta, nab + 1)
            vs.append(_display(v_edge))
            ws.append(_display(w_edge))
        geometry["V"].append(vs)
        geometry["W"].append(ws)
    doc = {
        "schema": WINDOW_SCHEMA,
        "kind": "overlay",
        "alphabet": alphabet_doc(ov),
        "rows": [{"i": i, "j_lo": row.j_lo, "base_off": row.base_off,
                  "letters": list(row.letters)}
                 for i, row in enumerate(window.rows)],
        "parents": [list(par) for par in window.parents],
        "geometry": geometry,
        "offsets": {"c": str(window.c), "d": str(window.d)},
        "base_window": _base_window_doc(window.base),
        "metadata": _meta_doc(window.meta),
    }
    if isinstance(window.side, _ExplicitRows):
        doc["second_window"] = _base_window_doc(window.side.window)
    return doc


def _display(value) -> str:
    if isinstance(value, Fraction):
        return AdaptiveReal.from_rational(value).decimal(DISPLAY_DIGITS)
    return value.decimal(DISPLAY_DIGITS)


def overlay_window_from_doc(doc: dict) -> OverlayWindow:
    ov = overlay_system_from_doc(doc["alphabet"])
    base = base_window_from_doc(doc["base_window"])
    rows = [OverlayRow(r["j_lo"], list(r["letters"]), r["base_off"])
            for r in doc["rows"]]
    geometry = [RowGeometry(D, d_, list(nab)) for D, d_, nab in
                zip(doc["geometry"]["Delta"], doc["geometry"]["delta"],
                    doc["geometry"]["nabla"])]
    c = Fraction(doc["offsets"]["c"])
    d = Fraction(doc["offsets"]["d"])
    window = OverlayWindow(ov, base, rows, [list(p) for p in doc["parents"]],
                           geometry, c, d, dict(doc.get("metadata", {})))
    if "second_window" in doc:
        window.side = _ExplicitRows(base_window_from_doc(doc["second_window"]),
                                    ov.eta, ov.gamma)
    else:
        window.side = _UnitRows(ov.sysB, ov.eta, ov.gamma)
    return window


def window_from_doc(doc: dict):
    if doc.get("schema") != WINDOW_SCHEMA:
        raise ParseError(f"not a window document: {doc.get('schema')!r}")
    if doc["kind"] == "base":
        return base_window_from_doc(doc)
    if doc["kind"] == "overlay":
        return overlay_window_from_doc(doc)
    raise ParseError(f"unknown window kind {doc['kind']!r}")


# -------------------------------------------------------------------- patches

def patch_doc(patch: GraphPatch, alphabet: Optional[list] = None) -> dict:
    """Patch document; overlay-lettered patches carry their alphabet and
    reference letters by index."""
    labels = {}
    letter_index = {}
    alphabet_docs = []
    plain = True
    for v, label in patch.vertices.items():
        if isinstance(label, OverlayLetter):
            plain = False
            key = label.key()
            if key not in letter_index:
                letter_index[key] = len(alphabet_docs)
                alphabet_docs.append(letter_doc(label))
            labels[v] = letter_index[key]
        else:
            labels[v] = str(label)
    return {
        "schema": PATCH_SCHEMA,
        "label_kind": "plain" if plain else "overlay",
        "alphabet": alphabet_docs,
        "vertices": [[v[0], v[1], labels[v]] for v in sorted(patch.vertices)],
        "row_range": {str(i): list(r) for i, r in patch.row_range.items()},
        "up": [[c[0], c[1], p[0], p[1]] for c, p in sorted(patch.up.items())],
        "complete": [[v[0], v[1]] for v in sorted(patch.complete)],
        "reduced": patch.reduced,
        "metadata": _meta_doc(patch.meta),
    }


def patch_from_doc(doc: dict) -> GraphPatch:
    if doc.get("schema") != PATCH_SCHEMA:
        raise ParseError(f"not a patch document: {doc.get('schema')!r}")
    alphabet = [letter_from_doc(x) for x in doc.get("alphabet", [])]
    vertices = {}
    for i, j, label in doc["vertices"]:
        if doc["label_kind"] == "overlay":
            vertices[(i, j)] = alphabet[label]
        else:
            vertices[(i, j)] = label
    row_range = {int(k): tuple(v) for k, v in doc["row_range"].items()}
    up = {(ci, cj): (pi, pj) for ci, cj, pi, pj in doc["up"]}
    complete = {(i, j) for i, j in doc["complete"]}
    return GraphPatch(vertices, row_range, up, complete,
                      reduced=doc["reduced"], meta=dict(doc.get("metadata", {})))


# ------------------------------------------------------------------- families

def family_doc(family: PatternFamily) -> dict:
    letter_index = {}
    alphabet_docs = []

    def index_of(key) -> int:
        if key not in letter_index:
            letter_index[key] = len(alphabet_docs)
            alphabet_docs.append(letter_doc(OverlayLetter(*key)))
        return letter_index[key]

    patterns = []
    for pattern in sorted(family.patterns, key=lambda p: (p.labels, p.edges)):
        info = family.patterns[pattern]
        patterns.append({
            "labels": [index_of(key) for key in pattern.labels],
            "edges": [list(e) for e in pattern.edges],
            "count": info["count"],
            "first": list(info["first"]),
        })
    return {
        "schema": FAMILY_SCHEMA,
        "p": family.p,
        "q": family.q,
        "alphabet_doc": alphabet_doc(family.ov),
        "base_system": system_doc(family.base),
        "letters": alphabet_docs,
        "patterns": patterns,
        "metadata": family.meta,
    }


def family_from_doc(doc: dict) -> PatternFamily:
    if doc.get("schema") != FAMILY_SCHEMA:
        raise ParseError(f"not a family document: {doc.get('schema')!r}")
    ov = overlay_system_from_doc(doc["alphabet_doc"])
    base = system_from_doc(doc["base_system"])
    letters = [letter_from_doc(x) for x in doc["letters"]]
    patterns = {}
    for entry in doc["patterns"]:
        labels = tuple(letters[k].key() for k in entry["labels"])
        edges = tuple(tuple(e) for e in entry["edges"])
        patterns[Pattern(labels, edges)] = {
            "count": entry["count"], "first": tuple(entry["first"])}
    return PatternFamily(doc["p"], doc["q"], ov, base, patterns,
                         dict(doc.get("metadata", {})))
