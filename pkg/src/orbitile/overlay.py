"""The composite alphabet recording how rows of one tiling cover another.

Each letter is a tuple (alpha, beta, p, s, delta): a letter of the first
system, the word of second-system tiles covering its top edge, the parts of
the produced row hanging over its left and right edges, and the number of
second-system rows it spans.  The row language is a 2-local adjacency
condition and the production rules are a checkable word equation; both are
realized as predicates, not a regular-expression engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .config import DEFAULT_SCALING_SLACK
from .errors import InvalidConstruction, NotExpansive, NotPrimitive
from .precision import AdaptiveReal
from .substitution import (Distribution, SubstitutionSystem, Word, apply,
                           distribution, growth_rate, is_expansive,
                           is_primitive, nu_length)


@dataclass(frozen=True)
class OverlayLetter:
    alpha: str
    beta: Word
    p: Word
    s: Word
    delta: int

    def __post_init__(self):
        if not self.beta:
            raise InvalidConstruction("beta component must be nonempty")

    def key(self):
        return (self.alpha, self.beta, self.p, self.s, self.delta)


def compute_K(lam: AdaptiveReal, gamma: AdaptiveReal) -> int:
    """Ceiling of log(lam)/log(gamma), decided by comparing powers of gamma
    against lam exactly; no floating logarithms touch the decision."""
    if lam.compare(1) <= 0 or gamma.compare(1) <= 0:
        raise ValueError("both growth rates must exceed 1")
    k = 1
    while gamma.__pow__(k).compare(lam) < 0:
        k += 1
        if k > 10_000:
            raise InvalidConstruction("K search exceeded sanity bound")
    return k


def scale_distributions(nu: Distribution, eta: Distribution, gamma: AdaptiveReal,
                        slack: Fraction = DEFAULT_SCALING_SLACK
                        ) -> tuple[Distribution, Distribution]:
    """Rescale so every nu weight strictly exceeds gamma times every eta
    weight: eta is normalized to min weight 1, then nu is scaled so its
    minimum equals slack * gamma * max(eta)."""
    if slack <= 1:
        raise ValueError("slack must exceed 1")
    eta_min = eta.min_weight()
    eta_scaled = Distribution(eta.system,
                              tuple((l, v / eta_min) for l, v in eta.weights))
    target = gamma * eta_scaled.max_weight() * AdaptiveReal.from_rational(slack)
    nu_min = nu.min_weight()
    nu_scaled = Distribution(nu.system,
                             tuple((l, v * (target / nu_min)) for l, v in nu.weights))
    # postcondition: min nu' > gamma * max eta'
    if (nu_scaled.min_weight() - gamma * eta_scaled.max_weight()).sign() <= 0:
        raise InvalidConstruction("scaling postcondition violated")
    return nu_scaled, eta_scaled


class OverlaySystem:
    """The full finite alphabet for a pair of systems, with its maps and
    the derived constants K and N."""

    def __init__(self, sysA: SubstitutionSystem, sysB: SubstitutionSystem,
                 nu: Distribution, eta: Distribution,
                 lam: AdaptiveReal, gamma: AdaptiveReal,
                 K: int, letters: tuple[OverlayLetter, ...],
                 slack: Fraction):
        self.sysA = sysA
        self.sysB = sysB
        self.nu = nu
        self.eta = eta
        self.lam = lam
        self.gamma = gamma
        self.K = K
        self.letters = letters
        self.slack = slack
        self.letter_index = {x.key(): i for i, x in enumerate(letters)}
        self.N = 1 + max(max(len(x.p), len(x.s)) for x in letters)

    def find(self, alpha, beta, p, s, delta) -> Optional[int]:
        return self.letter_index.get((alpha, tuple(beta), tuple(p), tuple(s), delta))

    def is_production(self, x: OverlayLetter, w: Sequence[OverlayLetter]) -> bool:
        """Production predicate: the children's betas, flanked by the
        parent's left overhang p, retile the parent's produced word through
        its right overhang s, and the first system produces the children's
        alphas.  (Without the trailing s the one-letter case of the
        telescoping row identity could not hold.)"""
        if not w:
            return False
        beta_w = tuple(itertools.chain.from_iterable(y.beta for y in w))
        if x.p + beta_w != apply(self.sysB, x.beta, x.delta) + x.s:
            return False
        return apply(self.sysA, (x.alpha,), 1) == tuple(y.alpha for y in w)

    def letter_is_valid(self, x: OverlayLetter) -> bool:
        """Re-check the two defining inequality chains for a letter,
        quantifying over the witness b."""
        wa = nu_length(self.nu, (x.alpha,))
        beta_tail = nu_length(self.eta, x.beta[1:])
        if beta_tail.compare(wa) >= 0:
            return False
        img1 = apply(self.sysB, (x.beta[0],), x.delta)
        if x.p != img1[:len(x.p)]:
            return False
        q = img1[len(x.p):]
        r = apply(self.sysB, x.beta[1:], x.delta)
        sig_alpha = nu_length(self.nu, apply(self.sysA, (x.alpha,), 1))
        for b in self.sysB.alphabet:
            if (wa - self.gamma * nu_length(self.eta, x.beta + (b,))).sign() >= 0:
                continue
            imgb = apply(self.sysB, (b,), x.delta)
            if len(x.s) >= len(imgb) or x.s != imgb[:len(x.s)]:
                continue
            t = imgb[len(x.s):]
            left = nu_length(self.eta, q[1:] + r + x.s)
            right = self.gamma * nu_length(self.eta, q + r + x.s + (t[0],))
            if left.compare(sig_alpha) < 0 and sig_alpha.compare(right) < 0:
                return True
        return False

    def __repr__(self):
        return (f"OverlaySystem({self.sysA.name} over {self.sysB.name}, "
                f"{len(self.letters)} letters, K={self.K}, N={self.N})")


def adjacent(x: OverlayLetter, y: OverlayLetter) -> bool:
    """Row-language adjacency: right overhang of x equals left overhang of
    y, and both letters span the same number of rows."""
    return x.s == y.p and x.delta == y.delta


def enumerate_alphabet(sysA: SubstitutionSystem, sysB: SubstitutionSystem,
                       slack: Fraction = DEFAULT_SCALING_SLACK) -> OverlaySystem:
    """Exhaustively enumerate the overlay alphabet.

    beta ranges over words short enough that the first inequality chain can
    hold, p over prefixes of the produced image of beta's first letter, s
    over proper prefixes of the produced image of the witness letter; every
    candidate is kept iff both chains hold strictly.
    """
    for sys in (sysA, sysB):
        if not is_primitive(sys):
            raise NotPrimitive(f"{sys.name} is not primitive")
        if not is_expansive(sys):
            raise NotExpansive(f"{sys.name} is not expansive")
    lam = growth_rate(sysA)
    gamma = growth_rate(sysB)
    nu, eta = scale_distributions(distribution(sysA), distribution(sysB),
                                  gamma, slack)
    K = compute_K(lam, gamma)
    eta_min = eta.min_weight()
    eta_w = eta.weight_map
    found: dict[tuple, OverlayLetter] = {}
    for alpha in sysA.alphabet:
        wa = nu_length(nu, (alpha,))
        sig_alpha = nu_length(nu, apply(sysA, (alpha,), 1))
        # largest admissible |beta|: (len-1) * min(eta) < |alpha|_nu
        max_len = 1
        while (AdaptiveReal.from_rational(max_len) * eta_min).compare(wa) < 0:
            max_len += 1
        for length in range(1, max_len + 1):
            for beta in itertools.product(sysB.alphabet, repeat=length):
                tail = nu_length(eta, beta[1:])
                if tail.compare(wa) >= 0:
                    continue
                for b in sysB.alphabet:
                    if wa.compare(gamma * nu_length(eta, beta + (b,))) >= 0:
                        continue
                    for delta in (K - 1, K):
                        if delta < 0:
                            continue
                        img1 = apply(sysB, (beta[0],), delta)
                        imgb = apply(sysB, (b,), delta)
                        r = apply(sysB, beta[1:], delta)
                        for lp in range(len(img1) + 1):
                            q = img1[lp:]
                            base = q[1:] + r
                            for ls in range(len(imgb)):
                                s = imgb[:ls]
                                t1 = imgb[ls]
                                left = nu_length(eta, base + s)
                                if left.compare(sig_alpha) >= 0:
                                    continue
                                right = gamma * nu_length(eta, q + r + s + (t1,))
                                if sig_alpha.compare(right) >= 0:
                                    continue
                                letter = OverlayLetter(alpha, beta, img1[:lp], s, delta)
                                found.setdefault(letter.key(), letter)
    if not found:
        raise InvalidConstruction("overlay alphabet came out empty")
    index = {letter: i for i, letter in enumerate(sysA.alphabet)}
    ordered = tuple(sorted(found.values(),
                           key=lambda x: (index[x.alpha], x.beta, x.p, x.s, x.delta)))
    return OverlaySystem(sysA, sysB, nu, eta, lam, gamma, K, ordered, slack)


def approx_eq(u: Sequence, v: Sequence, N: int) -> bool:
    """Words equal apart from prefixes and suffixes shorter than N.

    True iff u = p c s and v = p' c s' for some common factor c (possibly
    empty) with |p|, |p'|, |s|, |s'| all < N.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    u = tuple(u)
    v = tuple(v)
    for lp in range(min(N - 1, len(u)) + 1):
        for lpp in range(min(N - 1, len(v)) + 1):
            for ls in range(min(N - 1, len(u) - lp) + 1):
                lc = len(u) - lp - ls
                lss = len(v) - lpp - lc
                if lss < 0 or lss >= N:
                    continue
                if u[lp:lp + lc] == v[lpp:lpp + lc]:
                    return True
    return False


@dataclass(frozen=True)
class Property3Result:
    ok: bool
    failing_index: Optional[int] = None
    stage: Optional[str] = None

    def __bool__(self):
        return self.ok


def verify_property3(ov: OverlaySystem, w: Sequence[OverlayLetter],
                     parts: Sequence[Sequence[OverlayLetter]],
                     N: Optional[int] = None) -> Property3Result:
    """Check that a produced row pair satisfies the almost-equality of the
    produced second-system words: beta(w') agrees with the delta(w)-step
    image of beta(w) up to short overhangs.

    `parts` assigns to each letter of w the block of w' it produces; on
    failure the result carries the first offending index and which check
    tripped.
    """
    if N is None:
        N = ov.N
    if len(w) != len(parts) or not w:
        return Property3Result(False, None, "shape")
    deltas = {x.delta for x in w}
    if len(deltas) != 1:
        return Property3Result(False, None, "delta-constancy")
    for k, (x, part) in enumerate(zip(w, parts)):
        if not ov.is_production(x, tuple(part)):
            return Property3Result(False, k, "production")
    delta = w[0].delta
    beta_w = tuple(itertools.chain.from_iterable(x.beta for x in w))
    beta_wp = tuple(itertools.chain.from_iterable(
        y.beta for part in parts for y in part))
    if not approx_eq(beta_wp, apply(ov.sysB, beta_w, delta), N):
        return Property3Result(False, None, "approx-eq")
    return Property3Result(True)
