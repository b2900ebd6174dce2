"""Derivative-free scalar search helpers."""

import math

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_max(f, lo, hi, tol=1e-12, max_iter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]`` by golden-section search.

    Returns ``(x, f(x))`` for the best point seen, endpoints included, so a
    monotone ``f`` yields the correct boundary maximizer.
    """
    fa, fb = f(lo), f(hi)
    best = (lo, fa) if fa >= fb else (hi, fb)
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo) + abs(hi)):
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
    for cand in ((x1, f1), (x2, f2)):
        if cand[1] > best[1]:
            best = cand
    return best


def golden_min(f, lo, hi, tol=1e-12, max_iter=200):
    x, fx = golden_max(lambda s: -f(s), lo, hi, tol, max_iter)
    return x, -fx
