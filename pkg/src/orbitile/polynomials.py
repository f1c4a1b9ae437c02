"""Exact univariate polynomial arithmetic over the rationals.

Coefficients are Fractions stored low degree first; the zero polynomial is
the empty tuple.  Everything here is exact: evaluation, Sturm chains, root
counting, and the bisection / interval-Newton refinement used to isolate
the dominant eigenvalue of a substitution matrix.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Poly = tuple[Fraction, ...]


def poly(coeffs: Sequence) -> Poly:
    cs = [Fraction(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def degree(p: Poly) -> int:
    return len(p) - 1


def evaluate(p: Poly, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p: Poly) -> Poly:
    return poly([i * c for i, c in enumerate(p)][1:])


def add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return poly([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def neg(p: Poly) -> Poly:
    return tuple(-c for c in p)


def mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return poly(out)


def divmod_poly(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    quo = [Fraction(0)] * max(0, len(p) - len(q) + 1)
    dq = len(q) - 1
    lead = q[-1]
    for i in range(len(rem) - 1, dq - 1, -1):
        coeff = rem[i] / lead
        if coeff:
            quo[i - dq] = coeff
            for j, b in enumerate(q):
                rem[i - dq + j] -= coeff * b
    return poly(quo), poly(rem)


def monic(p: Poly) -> Poly:
    if not p:
        return p
    lead = p[-1]
    return tuple(c / lead for c in p)


def gcd(p: Poly, q: Poly) -> Poly:
    a, b = p, q
    while b:
        a, b = b, divmod_poly(a, b)[1]
    return monic(a)


def squarefree(p: Poly) -> Poly:
    """p with repeated roots collapsed to simple ones."""
    if degree(p) < 1:
        return p
    g = gcd(p, derivative(p))
    if degree(g) < 1:
        return monic(p)
    return monic(divmod_poly(p, g)[0])


def sturm_chain(p: Poly) -> list[Poly]:
    chain = [p, derivative(p)]
    while chain[-1] and degree(chain[-1]) > 0:
        rem = divmod_poly(chain[-2], chain[-1])[1]
        if not rem:
            break
        chain.append(neg(rem))
    return [c for c in chain if c]


def _variations(chain: list[Poly], x: Fraction) -> int:
    signs = []
    for c in chain:
        v = evaluate(c, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(chain: list[Poly], lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in (lo, hi]; chain from a squarefree p."""
    return _variations(chain, lo) - _variations(chain, hi)


def root_bound(p: Poly) -> Fraction:
    """Cauchy bound: all real roots lie in (-B, B)."""
    lead = abs(p[-1])
    return 1 + max(abs(c) for c in p[:-1]) / lead if len(p) > 1 else Fraction(1)


def isolate_largest_real_root(p: Poly) -> tuple[Fraction, Fraction]:
    """Open isolating interval (lo, hi) around the largest real root of p.

    p must have at least one real root; the returned interval contains
    exactly one root of the squarefree part of p, with a sign change.
    """
    sf = squarefree(p)
    chain = sturm_chain(sf)
    bound = root_bound(sf)
    lo, hi = -bound, bound
    if count_roots(chain, lo, hi) < 1:
        raise ValueError("polynomial has no real roots")
    # Push lo up until exactly one root remains in (lo, hi].
    while count_roots(chain, lo, hi) > 1:
        mid = (lo + hi) / 2
        if count_roots(chain, mid, hi) >= 1:
            lo = mid
        else:
            hi = mid
    # Make the interval open on the right and sign-changing for bisection.
    while evaluate(sf, hi) == 0 or evaluate(sf, lo) == 0 or \
            evaluate(sf, lo) * evaluate(sf, hi) > 0:
        if evaluate(sf, hi) == 0:
            # the root is exactly hi: return a tight rational point interval
            return hi, hi
        if evaluate(sf, lo) == 0:
            lo = (lo + hi) / 2
            continue
        mid = (lo + hi) / 2
        if count_roots(chain, mid, hi) >= 1:
            lo = mid
        else:
            hi = mid
    return lo, hi


def refine_root(p: Poly, lo: Fraction, hi: Fraction, width: Fraction) -> tuple[Fraction, Fraction]:
    """Shrink a sign-changing isolating interval of p below `width`.

    Tries interval-Newton steps (quadratic once the interval is small) and
    falls back to bisection whenever a step fails to contract.
    """
    if lo == hi:
        return lo, hi
    dp = derivative(p)
    flo = evaluate(p, lo)
    while hi - lo > width:
        # Interval Newton: m - p(m) / p'([lo, hi]) must land inside [lo, hi].
        dlo, dhi = _interval_eval(dp, lo, hi)
        stepped = False
        if dlo > 0 or dhi < 0:
            m = (lo + hi) / 2
            fm = evaluate(p, m)
            cands = sorted((m - fm / dlo, m - fm / dhi))
            nlo, nhi = max(lo, cands[0]), min(hi, cands[1])
            if nlo <= nhi and (nhi - nlo) < (hi - lo) * Fraction(3, 4):
                # keep the sign-change invariant
                if evaluate(p, nlo) * evaluate(p, nhi) <= 0:
                    lo, hi = nlo, nhi
                    flo = evaluate(p, lo)
                    stepped = True
        if not stepped:
            m = (lo + hi) / 2
            fm = evaluate(p, m)
            if fm == 0:
                return m, m
            if (flo < 0) == (fm < 0):
                lo, flo = m, fm
            else:
                hi = m
        if evaluate(p, lo) == 0:
            return lo, lo
        if evaluate(p, hi) == 0:
            return hi, hi
    return lo, hi


def _interval_eval(p: Poly, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Crude interval extension of p over [lo, hi] (Horner with intervals)."""
    alo, ahi = Fraction(0), Fraction(0)
    for c in reversed(p):
        cands = (alo * lo, alo * hi, ahi * lo, ahi * hi)
        alo, ahi = min(cands) + c, max(cands) + c
    return alo, ahi


def charpoly(matrix: Sequence[Sequence[int]]) -> Poly:
    """Characteristic polynomial det(xI - A) by Faddeev-LeVerrier.

    Exact over the rationals; for an integer matrix the result has integer
    coefficients (asserted).
    """
    n = len(matrix)
    A = [[Fraction(matrix[i][j]) for j in range(n)] for i in range(n)]
    coeffs = [Fraction(1)]  # leading coefficient of x^n
    M = [[Fraction(0)] * n for _ in range(n)]
    c = Fraction(1)
    for k in range(1, n + 1):
        # M  <-  A (M + c I)
        for i in range(n):
            M[i][i] += c
        M = _matmul(A, M)
        c = -_trace(M) / k
        coeffs.append(c)
    cs = list(reversed(coeffs))
    for co in cs:
        if co.denominator != 1:
            raise AssertionError("characteristic polynomial must be integral")
    return poly(cs)


def _matmul(A, B):
    n = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _trace(A):
    return sum(A[i][i] for i in range(len(A)))
