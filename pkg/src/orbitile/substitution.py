"""Symbolic substitution systems and their spectral data.

A system is a finite alphabet plus one production word per letter.  The
spectral quantities (dominant eigenvalue, positive left eigenvector) are
computed exactly: integer characteristic polynomial, Sturm isolation of the
largest real root, and eigenvector entries as coefficient vectors over the
resulting number field.  Comparisons against these values are decidable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Union

from . import polynomials as pol
from .errors import (IndeterminateComparison, NotExpansive, NotPrimitive,
                     ParseError, UnknownLetter)
from .precision import AdaptiveReal, AlgebraicNumber, NumberField

Word = tuple[str, ...]


@dataclass(frozen=True)
class SubstitutionSystem:
    """Alphabet (ordered) and one nonempty production word per letter."""

    name: str
    alphabet: tuple[str, ...]
    rules: tuple[tuple[str, Word], ...]

    def __post_init__(self):
        letters = set(self.alphabet)
        if not self.alphabet:
            raise ParseError("alphabet must be nonempty")
        if len(letters) != len(self.alphabet):
            raise ParseError("duplicate letters in alphabet")
        defined = dict(self.rules)
        if set(defined) != letters:
            raise ParseError("rules must cover the alphabet exactly")
        for letter, image in self.rules:
            if not image:
                raise ParseError(f"rule for {letter!r} has an empty image")
            for tok in image:
                if tok not in letters:
                    raise UnknownLetter(tok, letters)

    def rule(self, letter: str) -> Word:
        try:
            return self.rule_map[letter]
        except KeyError:
            raise UnknownLetter(letter, set(self.alphabet))

    @cached_property
    def rule_map(self) -> dict:
        return dict(self.rules)

    def index(self, letter: str) -> int:
        try:
            return self.alphabet.index(letter)
        except ValueError:
            raise UnknownLetter(letter, set(self.alphabet))

    def __repr__(self):
        return f"SubstitutionSystem({self.name!r}, {len(self.alphabet)} letters)"


def make_system(name: str, rules: dict) -> SubstitutionSystem:
    """Build a system from {letter: image} with images as strings or tuples.

    String images are split into single-character letters.
    """
    alphabet = tuple(rules)
    norm = []
    for letter, image in rules.items():
        norm.append((letter, tuple(image)))
    return SubstitutionSystem(name, alphabet, tuple(norm))


def as_word(sys: SubstitutionSystem, w: Union[str, Iterable[str]]) -> Word:
    word = tuple(w)
    letters = set(sys.alphabet)
    for tok in word:
        if tok not in letters:
            raise UnknownLetter(tok, letters)
    return word


def word_str(w: Word) -> str:
    if all(len(tok) == 1 for tok in w):
        return "".join(w)
    return " ".join(w)


# ------------------------------------------------------------------ parsing

def parse_system(text: str) -> SubstitutionSystem:
    """Parse the substitution-system text format:

        system <name>
        letter <L> -> <L1> <L2> ... <Lk>
    """
    name = None
    rules: list[tuple[str, Word]] = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "system":
            if name is not None:
                raise ParseError(f"line {lineno}: duplicate 'system' header")
            if len(tokens) != 2:
                raise ParseError(f"line {lineno}: expected 'system <name>'")
            name = tokens[1]
        elif tokens[0] == "letter":
            if name is None:
                raise ParseError(f"line {lineno}: 'letter' before 'system' header")
            if len(tokens) < 4 or tokens[2] != "->":
                raise ParseError(f"line {lineno}: expected 'letter <L> -> <L1> ...'")
            letter = tokens[1]
            if letter in seen:
                raise ParseError(f"line {lineno}: duplicate definition of {letter!r}")
            seen.add(letter)
            rules.append((letter, tuple(tokens[3:])))
        else:
            raise ParseError(f"line {lineno}: unknown directive {tokens[0]!r}")
    if name is None:
        raise ParseError("missing 'system <name>' header")
    if not rules:
        raise ParseError("no letter rules defined")
    alphabet = tuple(letter for letter, _ in rules)
    defined = set(alphabet)
    for letter, image in rules:
        for tok in image:
            if tok not in defined:
                raise ParseError(f"rule for {letter!r} uses undefined letter {tok!r}")
    return SubstitutionSystem(name, alphabet, tuple(rules))


def system_to_text(sys: SubstitutionSystem) -> str:
    lines = [f"system {sys.name}"]
    for letter, image in sys.rules:
        lines.append(f"letter {letter} -> {' '.join(image)}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- basic algebra

def substitution_matrix(sys: SubstitutionSystem) -> tuple[tuple[int, ...], ...]:
    """Entry (i, j) counts occurrences of letter i in the image of letter j."""
    n = len(sys.alphabet)
    pos = {letter: i for i, letter in enumerate(sys.alphabet)}
    cols = []
    for _, image in sys.rules:
        col = [0] * n
        for tok in image:
            col[pos[tok]] += 1
        cols.append(col)
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))


def letter_counts(sys: SubstitutionSystem, w: Word) -> tuple[int, ...]:
    pos = {letter: i for i, letter in enumerate(sys.alphabet)}
    out = [0] * len(sys.alphabet)
    for tok in w:
        try:
            out[pos[tok]] += 1
        except KeyError:
            raise UnknownLetter(tok, set(sys.alphabet))
    return tuple(out)


def is_primitive(sys: SubstitutionSystem) -> bool:
    """Some matrix power is entrywise positive; testing the Wielandt
    exponent (n-1)^2 + 1 suffices."""
    n = len(sys.alphabet)
    matrix = substitution_matrix(sys)
    # adjacency bitmask per row
    full = (1 << n) - 1
    rows = []
    for i in range(n):
        mask = 0
        for j in range(n):
            if matrix[i][j] > 0:
                mask |= 1 << j
        rows.append(mask)

    def bool_mul(a, b):
        out = []
        for i in range(n):
            mask = 0
            ai = a[i]
            for k in range(n):
                if ai >> k & 1:
                    mask |= b[k]
            out.append(mask)
        return out

    wielandt = (n - 1) ** 2 + 1
    power = rows
    # walk powers up to the Wielandt bound, checking positivity of A^k
    for _ in range(wielandt):
        if all(mask == full for mask in power):
            return True
        power = bool_mul(power, rows)
    return all(mask == full for mask in power)


def is_expansive(sys: SubstitutionSystem) -> bool:
    if not is_primitive(sys):
        raise NotPrimitive(f"{sys.name} is not primitive")
    return any(len(image) > 1 for _, image in sys.rules)


def apply(sys: SubstitutionSystem, w: Union[str, Word], k: int = 1) -> Word:
    """Apply the substitution k times to a word (k = 0 is the identity)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    word = as_word(sys, w)
    rules = sys.rule_map
    for _ in range(k):
        out = []
        for tok in word:
            out.extend(rules[tok])
        word = tuple(out)
    return word


def image_length(sys: SubstitutionSystem, letter: str, k: int) -> int:
    """|sigma^k(letter)| via matrix powers (no word materialization)."""
    matrix = substitution_matrix(sys)
    n = len(matrix)
    vec = [0] * n
    vec[sys.index(letter)] = 1
    for _ in range(k):
        vec = [sum(matrix[i][j] * vec[j] for j in range(n)) for i in range(n)]
    return sum(vec)


# --------------------------------------------------------------- growth rate

_growth_cache: dict = {}


def _require_primitive_expansive(sys: SubstitutionSystem):
    if not is_primitive(sys):
        raise NotPrimitive(f"{sys.name} is not primitive")
    if not is_expansive(sys):
        raise NotExpansive(f"{sys.name} is not expansive")


def _minimal_polynomial_of_root(cp: pol.Poly, lo: Fraction, hi: Fraction) -> pol.Poly:
    """Irreducible factor of cp whose root lies in the isolating interval."""
    import sympy

    x = sympy.Symbol("x")
    spoly = sympy.Poly([int(c) for c in reversed(cp)], x)
    factors = sympy.factor_list(spoly)[1]
    for factor, _mult in factors:
        coeffs = [Fraction(int(c)) for c in reversed(factor.all_coeffs())]
        f = pol.poly(coeffs)
        if pol.degree(f) == 0:
            continue
        if lo == hi:
            if pol.evaluate(f, lo) == 0:
                return pol.monic(f)
            continue
        if pol.evaluate(f, lo) * pol.evaluate(f, hi) < 0:
            return pol.monic(f)
    raise AssertionError("no factor matched the isolated root")


def growth_rate(sys: SubstitutionSystem) -> AdaptiveReal:
    """Dominant eigenvalue of the substitution matrix (> 1)."""
    if sys in _growth_cache:
        return _growth_cache[sys][0]
    _require_primitive_expansive(sys)
    cp = pol.charpoly(substitution_matrix(sys))
    lo, hi = pol.isolate_largest_real_root(cp)
    minpoly = _minimal_polynomial_of_root(cp, lo, hi)
    if pol.degree(minpoly) == 1:
        value = AdaptiveReal.from_rational(-minpoly[0] / minpoly[1])
        field = None
    else:
        # shrink the interval until it sign-isolates within the factor
        while pol.evaluate(minpoly, lo) * pol.evaluate(minpoly, hi) >= 0:
            lo, hi = pol.refine_root(pol.squarefree(cp), lo, hi, (hi - lo) / 4)
        root = AlgebraicNumber(minpoly, lo, hi)
        field = NumberField(root)
        value = AdaptiveReal.from_field(field, (Fraction(0), Fraction(1)))
    if value.compare(1) <= 0:
        raise AssertionError("dominant eigenvalue must exceed 1")
    _growth_cache[sys] = (value, field, minpoly)
    return value


def growth_field(sys: SubstitutionSystem) -> Optional[NumberField]:
    growth_rate(sys)
    return _growth_cache[sys][1]


def growth_minpoly(sys: SubstitutionSystem) -> pol.Poly:
    growth_rate(sys)
    return _growth_cache[sys][2]


# -------------------------------------------------------------- distribution

@dataclass(frozen=True)
class Distribution:
    """Strictly positive left eigenvector for the growth rate, as a map
    letter -> AdaptiveReal."""

    system: SubstitutionSystem
    weights: tuple[tuple[str, AdaptiveReal], ...]

    def weight(self, letter: str) -> AdaptiveReal:
        for cand, value in self.weights:
            if cand == letter:
                return value
        raise UnknownLetter(letter, set(self.system.alphabet))

    @property
    def weight_map(self) -> dict:
        return dict(self.weights)

    def min_weight(self) -> AdaptiveReal:
        values = [v for _, v in self.weights]
        best = values[0]
        for v in values[1:]:
            if v.compare(best) < 0:
                best = v
        return best

    def max_weight(self) -> AdaptiveReal:
        values = [v for _, v in self.weights]
        best = values[0]
        for v in values[1:]:
            if v.compare(best) > 0:
                best = v
        return best

    def scaled(self, factor: AdaptiveReal) -> "Distribution":
        return Distribution(self.system,
                            tuple((l, v * factor) for l, v in self.weights))


def _solve_left_kernel(matrix, lam_field: Optional[NumberField], lam_rational):
    """Kernel vector of (A^T - lam I) with exact field arithmetic."""
    n = len(matrix)
    if lam_field is None:
        def embed(q):
            return Fraction(q)

        def from_lambda():
            return lam_rational

        add_ = lambda a, b: a + b
        sub_ = lambda a, b: a - b
        mul_ = lambda a, b: a * b
        inv_ = lambda a: 1 / a
        zero_ = lambda a: a == 0
    else:
        deg = lam_field.degree

        def embed(q):
            return (Fraction(q),) + (Fraction(0),) * (deg - 1)

        def from_lambda():
            return lam_field.reduce((Fraction(0), Fraction(1)))

        add_ = lambda a, b: tuple(x + y for x, y in zip(a, b))
        sub_ = lambda a, b: tuple(x - y for x, y in zip(a, b))
        mul_ = lam_field.mul
        inv_ = lam_field.inverse
        zero_ = lambda a: all(c == 0 for c in a)

    lam = from_lambda()
    # M = A^T - lam I
    M = [[embed(matrix[j][i]) for j in range(n)] for i in range(n)]
    for i in range(n):
        M[i][i] = sub_(M[i][i], lam)
    # forward elimination with exact zero tests
    pivots = []
    row = 0
    for col in range(n):
        pivot = None
        for r in range(row, n):
            if not zero_(M[r][col]):
                pivot = r
                break
        if pivot is None:
            continue
        M[row], M[pivot] = M[pivot], M[row]
        pinv = inv_(M[row][col])
        M[row] = [mul_(entry, pinv) for entry in M[row]]
        for r in range(n):
            if r != row and not zero_(M[r][col]):
                factor = M[r][col]
                M[r] = [sub_(a, mul_(factor, b)) for a, b in zip(M[r], M[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        raise AssertionError("dominant eigenvalue must be geometrically simple")
    fcol = free[0]
    solution = [embed(0)] * n
    solution[fcol] = embed(1)
    for r, col in enumerate(pivots):
        solution[col] = sub_(embed(0), M[r][fcol])
    return solution


_distribution_cache: dict = {}


def distribution(sys: SubstitutionSystem) -> Distribution:
    """Left eigenvector for the growth rate, normalized to min weight 1."""
    if sys in _distribution_cache:
        return _distribution_cache[sys]
    growth_rate(sys)
    _, field, _ = _growth_cache[sys]
    matrix = substitution_matrix(sys)
    lam_rational = growth_rate(sys).exact_rational()
    kernel = _solve_left_kernel(matrix, field, lam_rational)
    if field is None:
        values = [AdaptiveReal.from_rational(entry) for entry in kernel]
    else:
        values = [AdaptiveReal.from_field(field, entry) for entry in kernel]
    if values[0].sign() < 0:
        values = [-v for v in values]
    for v in values:
        if v.sign() <= 0:
            raise AssertionError("dominant left eigenvector must be strictly positive")
    dist = Distribution(sys, tuple(zip(sys.alphabet, values)))
    minimum = dist.min_weight()
    dist = Distribution(sys, tuple((l, v / minimum) for l, v in dist.weights))
    _distribution_cache[sys] = dist
    return dist


def nu_length(dist: Distribution, w: Union[str, Word]) -> AdaptiveReal:
    """Weighted word length: the sum of the distribution weights of the
    letters of w.  Empty words have length 0."""
    word = as_word(dist.system, w)
    total = AdaptiveReal.from_rational(0)
    weight_map = dist.weight_map
    for tok in word:
        total = total + weight_map[tok]
    return total


# ----------------------------------------------------------- commensurability

@dataclass(frozen=True)
class IncommensurateUpTo:
    bound: int


@dataclass(frozen=True)
class Commensurate:
    m: int
    n: int


@dataclass(frozen=True)
class Indeterminate:
    reason: str


def _element_minpoly(field: NumberField, coeffs) -> pol.Poly:
    """Minimal polynomial of a field element via first linear dependency of
    its powers in the basis 1, theta, ..., theta^(d-1)."""
    deg = field.degree
    power = field.reduce((Fraction(1),))
    rows = [power]
    e = field.reduce(coeffs)
    for _ in range(deg):
        power = field.mul(power, e)
        rows.append(power)
        dep = _linear_dependency(rows, deg)
        if dep is not None:
            return pol.monic(pol.poly(dep))
    raise AssertionError("element minimal polynomial not found")


def _linear_dependency(rows, dim):
    """Coefficients (c0..ck) with sum c_i rows[i] = 0 and c_k = 1, if the
    last row is dependent on the earlier ones."""
    k = len(rows) - 1
    # solve sum_{i<k} c_i rows[i] = -rows[k]
    M = [[rows[i][d] for i in range(k)] for d in range(dim)]
    rhs = [-rows[k][d] for d in range(dim)]
    sol = _solve_rational(M, rhs)
    if sol is None:
        return None
    return sol + [Fraction(1)]


def _solve_rational(M, rhs):
    nrows = len(M)
    ncols = len(M[0]) if M else 0
    aug = [list(M[r]) + [rhs[r]] for r in range(nrows)]
    pivots = []
    row = 0
    for col in range(ncols):
        pivot = next((r for r in range(row, nrows) if aug[r][col] != 0), None)
        if pivot is None:
            continue
        aug[row], aug[pivot] = aug[pivot], aug[row]
        pv = aug[row][col]
        aug[row] = [a / pv for a in aug[row]]
        for r in range(nrows):
            if r != row and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
    for r in range(row, nrows):
        if aug[r][ncols] != 0:
            return None  # inconsistent
    sol = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        sol[col] = aug[r][ncols]
    return sol


def _power_minpoly(sys: SubstitutionSystem, exponent: int) -> pol.Poly:
    lam = growth_rate(sys)
    field = growth_field(sys)
    q = lam.exact_rational()
    if q is not None:
        return pol.poly([-(q ** exponent), Fraction(1)])
    elem = field.reduce((Fraction(0), Fraction(1)))
    power = field.reduce((Fraction(1),))
    for _ in range(exponent):
        power = field.mul(power, elem)
    return _element_minpoly(field, power)


def incommensurate(sysA: SubstitutionSystem, sysB: SubstitutionSystem, bound: int):
    """Search for lam^m = gamma^n with m, n <= bound.

    Equality is certified by minimal-polynomial identity (both powers are
    the dominant real roots of their minimal polynomials, so identical
    polynomials force identical values); interval comparison only screens.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    lam = growth_rate(sysA)
    gam = growth_rate(sysB)
    try:
        minpolys_a = {}
        minpolys_b = {}
        for m in range(1, bound + 1):
            lam_m = lam ** m
            for n in range(1, bound + 1):
                gam_n = gam ** n
                lo1, hi1 = lam_m.interval(96)
                lo2, hi2 = gam_n.interval(96)
                if lo1 > hi2 or hi1 < lo2:
                    continue
                if m not in minpolys_a:
                    minpolys_a[m] = _power_minpoly(sysA, m)
                if n not in minpolys_b:
                    minpolys_b[n] = _power_minpoly(sysB, n)
                if minpolys_a[m] == minpolys_b[n]:
                    return Commensurate(m, n)
        return IncommensurateUpTo(bound)
    except IndeterminateComparison as exc:
        return Indeterminate(str(exc))
