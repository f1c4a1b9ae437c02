"""Independent oracles used to pin expected values in the test suite.

Everything here deliberately avoids the package's own numeric kernel: word
expansion is naive, eigen-data comes from sympy's exact linear algebra, and
the alphabet enumeration below follows the defining inequality chains with
sympy's exact real comparisons.
"""

import itertools
from fractions import Fraction

import sympy


def expand(rules, word, k=1):
    word = tuple(word)
    for _ in range(k):
        out = []
        for tok in word:
            out.extend(tuple(rules[tok]))
        word = tuple(out)
    return word


def brute_growth_estimate(rules, letter, depth):
    """Ratio of successive expanded word lengths; converges to the growth
    rate like the second-eigenvalue ratio to the power of depth."""
    w = expand(rules, (letter,), depth)
    w_next = expand(rules, w, 1)
    return len(w_next) / len(w)


def sympy_eigendata(rules):
    """(lam, {letter: weight}) exactly, weights normalized to min 1."""
    letters = list(rules)
    n = len(letters)
    idx = {a: i for i, a in enumerate(letters)}
    M = sympy.zeros(n, n)
    for j, a in enumerate(letters):
        for tok in rules[a]:
            M[idx[tok], j] += 1
    eigs = [sympy.simplify(e) for e in M.eigenvals()]
    reals = [e for e in eigs if e.is_real]
    lam = max(reals, key=lambda e: sympy.N(e, 30))
    null = (M.T - lam * sympy.eye(n)).nullspace()
    assert len(null) == 1
    vec = [sympy.simplify(sympy.radsimp(x)) for x in null[0]]
    if sympy.N(vec[0]) < 0:
        vec = [-x for x in vec]
    low = min(vec, key=lambda e: sympy.N(e, 30))
    vec = [sympy.simplify(sympy.radsimp(x / low)) for x in vec]
    return lam, dict(zip(letters, vec))


def oracle_alphabet(rules_a, rules_b, slack=Fraction(3, 2)):
    """Exhaustive overlay-alphabet oracle; returns a set of 5-tuples
    (alpha, beta, p, s, delta) with words as tuples."""
    lam, nu = sympy_eigendata(rules_a)
    gam, eta = sympy_eigendata(rules_b)
    eta_min = min(eta.values(), key=lambda e: sympy.N(e, 30))
    eta = {k: sympy.simplify(v / eta_min) for k, v in eta.items()}
    eta_max = max(eta.values(), key=lambda e: sympy.N(e, 30))
    nu_min = min(nu.values(), key=lambda e: sympy.N(e, 30))
    target = gam * eta_max * sympy.Rational(slack.numerator, slack.denominator)
    nu = {k: sympy.simplify(v * target / nu_min) for k, v in nu.items()}

    def wlen(dist, word):
        return sympy.Add(*[dist[t] for t in word])

    K = 1
    while sympy.N(gam ** K - lam, 40) < 0:
        K += 1

    letters_b = list(rules_b)
    out = set()
    for alpha in rules_a:
        wa = nu[alpha]
        sig_alpha = wlen(nu, expand(rules_a, (alpha,)))
        max_len = 1
        while sympy.N(max_len * eta_min - wa, 40) < 0:
            max_len += 1
        for length in range(1, max_len + 1):
            for beta in itertools.product(letters_b, repeat=length):
                if not _lt(wlen(eta, beta[1:]), wa):
                    continue
                for b in letters_b:
                    if not _lt(wa, gam * wlen(eta, beta + (b,))):
                        continue
                    for delta in (K - 1, K):
                        if delta < 0:
                            continue
                        img1 = expand(rules_b, (beta[0],), delta)
                        imgb = expand(rules_b, (b,), delta)
                        r = expand(rules_b, beta[1:], delta)
                        for lp in range(len(img1) + 1):
                            q = img1[lp:]
                            for ls in range(len(imgb)):
                                s = imgb[:ls]
                                t1 = imgb[ls]
                                if not _lt(wlen(eta, q[1:] + r + s), sig_alpha):
                                    continue
                                if not _lt(sig_alpha, gam * wlen(eta, q + r + s + (t1,))):
                                    continue
                                out.add((alpha, beta, img1[:lp], s, delta))
    return out


def _lt(a, b):
    diff = sympy.simplify(b - a)
    if diff.is_positive is not None:
        return bool(diff.is_positive)
    return sympy.N(diff, 50) > 0
