"""Adaptive-precision real scalars with decidable comparisons.

An AdaptiveReal is an immutable node that can produce a rational interval
enclosure of its value at any requested precision, up to a configured bit
budget.  Three node kinds exist:

* exact rationals (point intervals),
* elements of a real algebraic number field Q(theta), stored as exact
  coefficient vectors over a root theta of an irreducible integer
  polynomial (theta's isolating interval refines by interval Newton),
* generic arithmetic nodes combining values from different fields.

Comparisons refine until the enclosures separate.  If they never do, an
exact certificate is attempted (coefficient vectors inside one field, or a
minimal-polynomial zero test for mixed expressions); only when that also
fails does IndeterminateComparison escape.  Quantities of the form
e^q * A + B with rational q and algebraic A, B get a dedicated comparison
that exploits the transcendence of e^q for nonzero rational q.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from mpmath import libmp

from . import polynomials as pol
from .config import bit_budget
from .errors import IndeterminateComparison

_ESCALATION_START = 64


def _schedule(budget):
    bits = _ESCALATION_START
    while bits < budget:
        yield bits
        bits *= 2
    yield budget


class AlgebraicNumber:
    """A real root of an irreducible integer polynomial, refinable on demand.

    The isolating interval only ever shrinks and never excludes the root.
    Refinement is lock-guarded so concurrent comparisons stay deterministic.
    """

    def __init__(self, minpoly: pol.Poly, lo: Fraction, hi: Fraction):
        if pol.degree(minpoly) < 2:
            raise ValueError("degree-1 roots should be plain rationals")
        self.minpoly = minpoly
        self._lo = lo
        self._hi = hi
        self._lock = threading.Lock()
        self._sympy = None

    def interval(self, bits: int) -> tuple[Fraction, Fraction]:
        width = Fraction(1, 2 ** bits)
        if self._hi - self._lo <= width:
            return self._lo, self._hi
        with self._lock:
            if self._hi - self._lo > width:
                self._lo, self._hi = pol.refine_root(self.minpoly, self._lo, self._hi, width)
            return self._lo, self._hi

    def to_sympy(self):
        if self._sympy is None:
            import sympy

            x = sympy.Symbol("x")
            expr = sympy.Poly([int(c) for c in reversed(self.minpoly)], x)
            chain = pol.sturm_chain(self.minpoly)
            bound = pol.root_bound(self.minpoly)
            index = pol.count_roots(chain, -bound, self._lo)
            self._sympy = sympy.CRootOf(expr, index)
        return self._sympy

    def __repr__(self):
        mid = float((self._lo + self._hi) / 2)
        return f"AlgebraicNumber(~{mid:.9g}, deg {pol.degree(self.minpoly)})"


class NumberField:
    """Q(theta) for a fixed AlgebraicNumber theta; elements are coefficient
    vectors of length deg(minpoly)."""

    def __init__(self, theta: AlgebraicNumber):
        self.theta = theta
        self.degree = pol.degree(theta.minpoly)

    def reduce(self, coeffs: Sequence[Fraction]) -> tuple[Fraction, ...]:
        p = pol.poly(coeffs)
        if pol.degree(p) >= self.degree:
            p = pol.divmod_poly(p, self.theta.minpoly)[1]
        out = list(p) + [Fraction(0)] * (self.degree - len(p))
        return tuple(out)

    def mul(self, a, b):
        return self.reduce(pol.mul(pol.poly(a), pol.poly(b)))

    def inverse(self, a):
        pa = pol.poly(a)
        if not pa:
            raise ZeroDivisionError("inverse of zero field element")
        # extended Euclid: u*pa + v*minpoly = g (a nonzero constant)
        r0, r1 = self.theta.minpoly, pa
        s0, s1 = (), pol.poly([1])
        while pol.degree(r1) > 0:
            q, r = pol.divmod_poly(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, pol.add(s0, pol.neg(pol.mul(q, s1)))
            if not r1:
                raise ZeroDivisionError("element shares a factor with the minimal polynomial")
        g = r1[0]
        inv = tuple(c / g for c in s1)
        return self.reduce(inv)


def _interval_horner(coeffs, tlo, thi):
    alo, ahi = Fraction(0), Fraction(0)
    for c in reversed(coeffs):
        cands = (alo * tlo, alo * thi, ahi * tlo, ahi * thi)
        alo, ahi = min(cands) + c, max(cands) + c
    return alo, ahi


_RAT, _ALG, _OP = "rat", "alg", "op"


class AdaptiveReal:
    """Immutable refinable real scalar.  Construct via the helpers below or
    by arithmetic on existing values; plain ints and Fractions mix in."""

    __slots__ = ("kind", "value", "field", "coeffs", "op", "args", "_cache", "_sympy")

    def __init__(self, kind, *, value=None, field=None, coeffs=None, op=None, args=None):
        self.kind = kind
        self.value = value
        self.field = field
        self.coeffs = coeffs
        self.op = op
        self.args = args
        self._cache = None  # (bits, lo, hi)
        self._sympy = None

    # ---------------------------------------------------------------- build

    @staticmethod
    def from_rational(q) -> "AdaptiveReal":
        return AdaptiveReal(_RAT, value=Fraction(q))

    @staticmethod
    def from_field(field: NumberField, coeffs) -> "AdaptiveReal":
        coeffs = field.reduce(coeffs)
        if all(c == 0 for c in coeffs[1:]):
            return AdaptiveReal(_RAT, value=coeffs[0])
        return AdaptiveReal(_ALG, field=field, coeffs=coeffs)

    @staticmethod
    def _coerce(x) -> "AdaptiveReal":
        if isinstance(x, AdaptiveReal):
            return x
        if isinstance(x, (int, Fraction)):
            return AdaptiveReal.from_rational(x)
        raise TypeError(f"cannot interpret {x!r} as AdaptiveReal")

    def _as_field(self, field: NumberField):
        """Coefficient vector of self inside `field`, or None."""
        if self.kind == _RAT:
            return (self.value,) + (Fraction(0),) * (field.degree - 1)
        if self.kind == _ALG and self.field is field:
            return self.coeffs
        return None

    # ------------------------------------------------------------ arithmetic

    def _binary(self, other, op):
        other = AdaptiveReal._coerce(other)
        a, b = self, other
        if a.kind == _RAT and b.kind == _RAT:
            if op == "add":
                return AdaptiveReal.from_rational(a.value + b.value)
            if op == "sub":
                return AdaptiveReal.from_rational(a.value - b.value)
            if op == "mul":
                return AdaptiveReal.from_rational(a.value * b.value)
            if op == "div":
                return AdaptiveReal.from_rational(a.value / b.value)
        field = a.field if a.kind == _ALG else (b.field if b.kind == _ALG else None)
        if field is not None:
            ca, cb = a._as_field(field), b._as_field(field)
            if ca is not None and cb is not None:
                if op == "add":
                    return AdaptiveReal.from_field(field, [x + y for x, y in zip(ca, cb)])
                if op == "sub":
                    return AdaptiveReal.from_field(field, [x - y for x, y in zip(ca, cb)])
                if op == "mul":
                    return AdaptiveReal.from_field(field, field.mul(ca, cb))
                if op == "div":
                    return AdaptiveReal.from_field(field, field.mul(ca, field.inverse(cb)))
        return AdaptiveReal(_OP, op=op, args=(a, b))

    def __add__(self, other):
        return self._binary(other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, "sub")

    def __rsub__(self, other):
        return AdaptiveReal._coerce(other)._binary(self, "sub")

    def __mul__(self, other):
        return self._binary(other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, "div")

    def __rtruediv__(self, other):
        return AdaptiveReal._coerce(other)._binary(self, "div")

    def __neg__(self):
        return AdaptiveReal.from_rational(0) - self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return AdaptiveReal.from_rational(1) / (self ** (-n))
        result = AdaptiveReal.from_rational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -------------------------------------------------------------- numerics

    def interval(self, bits: int) -> tuple[Fraction, Fraction]:
        cached = self._cache
        if cached is not None and cached[0] >= bits:
            return cached[1], cached[2]
        if self.kind == _RAT:
            lo = hi = self.value
        elif self.kind == _ALG:
            tlo, thi = self.field.theta.interval(bits)
            lo, hi = _interval_horner(self.coeffs, tlo, thi)
        else:
            lo, hi = self._op_interval(bits)
        self._cache = (bits, lo, hi)
        return lo, hi

    def _op_interval(self, bits):
        a, b = self.args
        alo, ahi = a.interval(bits)
        blo, bhi = b.interval(bits)
        if self.op == "add":
            return alo + blo, ahi + bhi
        if self.op == "sub":
            return alo - bhi, ahi - blo
        if self.op == "mul":
            cands = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
            return min(cands), max(cands)
        if self.op == "div":
            budget = bit_budget()
            while blo <= 0 <= bhi:
                if bits >= budget:
                    raise IndeterminateComparison(
                        "denominator enclosure still contains zero", bits=budget)
                bits = min(bits * 2, budget)
                blo, bhi = b.interval(bits)
            inv = (1 / blo, 1 / bhi)
            ilo, ihi = min(inv), max(inv)
            cands = (alo * ilo, alo * ihi, ahi * ilo, ahi * ihi)
            return min(cands), max(cands)
        raise AssertionError(self.op)

    def __float__(self):
        lo, hi = self.interval(64)
        return float((lo + hi) / 2)

    def decimal(self, digits: int = 50) -> str:
        """Decimal string with `digits` significant digits (display only)."""
        import mpmath

        bits = int(digits * 3.33) + 32
        lo, hi = self.interval(bits)
        mid = (lo + hi) / 2
        with mpmath.workdps(digits + 5):
            return mpmath.nstr(mpmath.mpf(mid.numerator) / mid.denominator, digits)

    # ------------------------------------------------------------- decisions

    def exact_rational(self) -> Optional[Fraction]:
        return self.value if self.kind == _RAT else None

    def is_zero(self) -> bool:
        """Exact zero test (decidable for all nodes we construct)."""
        if self.kind == _RAT:
            return self.value == 0
        if self.kind == _ALG:
            return all(c == 0 for c in self.coeffs)
        lo, hi = self.interval(_ESCALATION_START)
        if lo > 0 or hi < 0:
            return False
        return self._sympy_is_zero()

    def _sympy_is_zero(self) -> bool:
        import sympy

        expr = self.to_sympy()
        try:
            mp = sympy.minimal_polynomial(expr, sympy.Symbol("x"))
        except Exception as exc:  # not algebraic or too hard
            raise IndeterminateComparison(
                f"no exact zero certificate for {expr}: {exc}", bits=bit_budget())
        return mp == sympy.Symbol("x")

    def to_sympy(self):
        if self._sympy is not None:
            return self._sympy
        import sympy

        if self.kind == _RAT:
            out = sympy.Rational(self.value.numerator, self.value.denominator)
        elif self.kind == _ALG:
            theta = self.field.theta.to_sympy()
            out = sympy.Integer(0)
            for i, c in enumerate(self.coeffs):
                if c:
                    out += sympy.Rational(c.numerator, c.denominator) * theta ** i
        else:
            a, b = (arg.to_sympy() for arg in self.args)
            out = {"add": a + b, "sub": a - b, "mul": a * b, "div": a / b}[self.op]
        self._sympy = out
        return out

    def compare(self, other, budget: Optional[int] = None) -> int:
        """-1, 0 or +1; raises IndeterminateComparison at the bit budget."""
        other = AdaptiveReal._coerce(other)
        diff = self - other
        if diff.kind == _RAT:
            v = diff.value
            return (v > 0) - (v < 0)
        budget = budget or bit_budget()
        for bits in _schedule(budget):
            lo, hi = diff.interval(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            if lo == hi == 0:
                return 0
        if diff.is_zero():
            return 0
        raise IndeterminateComparison("enclosures never separated", bits=budget)

    def sign(self, budget: Optional[int] = None) -> int:
        return self.compare(0, budget)

    def __repr__(self):
        try:
            lo, hi = self.interval(64)
            return f"AdaptiveReal(~{float((lo + hi) / 2):.9g})"
        except IndeterminateComparison:
            return "AdaptiveReal(<unresolved>)"


ZERO = AdaptiveReal.from_rational(0)
ONE = AdaptiveReal.from_rational(1)


@lru_cache(maxsize=None)
def exp_enclosure(q: Fraction, bits: int) -> tuple[Fraction, Fraction]:
    """Rigorous rational enclosure of e^q, widened by a few ulps of margin."""
    prec = bits + 16
    xlo = libmp.from_rational(q.numerator, q.denominator, prec, libmp.round_floor)
    xhi = libmp.from_rational(q.numerator, q.denominator, prec, libmp.round_ceiling)
    elo = libmp.mpf_exp(xlo, prec, libmp.round_floor)
    ehi = libmp.mpf_exp(xhi, prec, libmp.round_ceiling)
    ln, ld = libmp.to_rational(elo)
    hn, hd = libmp.to_rational(ehi)
    pad = Fraction(1, 2 ** (prec - 4))
    lo = Fraction(int(ln), int(ld))
    hi = Fraction(int(hn), int(hd))
    return lo * (1 - pad), hi * (1 + pad)


def compare_affine_exp(coef, q: Fraction, const, budget: Optional[int] = None) -> int:
    """Sign of e^q * coef + const for rational q and algebraic coef, const.

    For q != 0 the value can vanish only when coef and const are both zero
    (e^q is transcendental), so ties are decided exactly; otherwise interval
    refinement must separate and the budget bounds the search.
    """
    coef = AdaptiveReal._coerce(coef)
    const = AdaptiveReal._coerce(const)
    q = Fraction(q)
    if q == 0:
        return (coef + const).sign(budget)
    if coef.is_zero():
        return const.sign(budget)
    budget = budget or bit_budget()
    ca, cb = coef.exact_rational(), const.exact_rational()
    if ca is not None and cb is not None:
        # sign of e^q + cb/ca, flipped by the sign of ca; e^q is irrational
        # for rational q != 0, so the target is never hit exactly
        target = -cb / ca
        flip = 1 if ca > 0 else -1
        for bits in _schedule(budget):
            lo, hi = exp_enclosure(q, bits)
            if lo > target:
                return flip
            if hi < target:
                return -flip
        raise IndeterminateComparison(
            "affine-exponential comparison unresolved", bits=budget)
    for bits in _schedule(budget):
        elo, ehi = exp_enclosure(q, bits)
        alo, ahi = coef.interval(bits)
        blo, bhi = const.interval(bits)
        cands = (elo * alo, elo * ahi, ehi * alo, ehi * ahi)
        lo, hi = min(cands) + blo, max(cands) + bhi
        if lo > 0:
            return 1
        if hi < 0:
            return -1
    if const.is_zero():
        # e^q * coef with coef nonzero: sign is the sign of coef
        return coef.sign(budget)
    raise IndeterminateComparison("affine-exponential comparison unresolved", bits=budget)
