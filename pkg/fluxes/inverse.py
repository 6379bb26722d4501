"""
Vectorized bisection inverses of monotone polynomial pieces.
"""
import numpy as np
from numpy.polynomial import Polynomial

BISECTION_ITERATIONS = 60
MAX_EXPANSIONS = 80


def monotone_inverse(
    poly: Polynomial,
    targets,
    lo,
    hi,
    iterations: int = BISECTION_ITERATIONS,
) -> np.ndarray:
    """
    Solve poly(u) = target for u, where poly is increasing.

    The initial bracket [lo, hi] is widened geometrically until it contains
    every target, then halved `iterations` times.
    """
    targets = np.asarray(targets, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), targets.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), targets.shape).copy()
    width = np.maximum(hi - lo, 1.0)
    for _ in range(MAX_EXPANSIONS):
        low_short = poly(lo) > targets
        high_short = poly(hi) < targets
        if not (low_short.any() or high_short.any()):
            break
        lo = np.where(low_short, lo - width, lo)
        hi = np.where(high_short, hi + width, hi)
        width = 2.0 * width
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        above = poly(mid) > targets
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def branch_inverse(
    poly: Polynomial,
    targets,
    anchor: float,
    direction: int,
    iterations: int = BISECTION_ITERATIONS,
) -> np.ndarray:
    """
    Invert poly on the branch starting at `anchor` and running in `direction` (+1 or -1),
    along which poly increases. Targets below poly(anchor) have no preimage on the branch;
    callers detect that before calling.
    """
    targets = np.asarray(targets, dtype=float)
    far = np.ones(targets.shape)
    for _ in range(MAX_EXPANSIONS):
        short = poly(anchor + direction * far) < targets
        if not short.any():
            break
        far = np.where(short, 2.0 * far, far)
    near = np.zeros(targets.shape)
    for _ in range(iterations):
        mid = 0.5 * (near + far)
        above = poly(anchor + direction * mid) > targets
        far = np.where(above, mid, far)
        near = np.where(above, near, mid)
    return anchor + direction * 0.5 * (near + far)
