"""
Fixed-step time marching with exact landing on snapshot times.
"""
import logging
from typing import Callable, List, Sequence, Tuple

import numpy as np

from errors import SolverInstabilityError

logger = logging.getLogger(__name__)

Advance = Callable[[np.ndarray, float, int], np.ndarray]


def march(
    initial: np.ndarray,
    schedule: Sequence[float],
    dt: float,
    advance: Advance,
) -> Tuple[List[float], List[np.ndarray], int]:
    """
    Advance with the fixed step dt, shortening the last step of each snapshot interval.

    Args:
        initial: State at t = schedule[0] = 0
        schedule: Sorted snapshot times
        dt: Base step
        advance: advance(u, h, step_index) -> new state after a step of length h

    Returns:
        (times, snapshots, steps taken)
    """
    u = np.array(initial, dtype=float)
    t = float(schedule[0])
    times, snapshots = [t], [u.copy()]
    steps = 0
    for target in schedule[1:]:
        while target - t > 1e-13 * max(1.0, abs(target)):
            remaining = target - t
            if remaining <= dt * (1.0 + 1e-12):
                h, t_next = remaining, float(target)
            else:
                h, t_next = dt, t + dt
            u = advance(u, h, steps)
            steps += 1
            if not np.all(np.isfinite(u)):
                raise SolverInstabilityError("non-finite values in solution", step=steps, time=t_next)
            t = t_next
        times.append(float(target))
        snapshots.append(u.copy())
        logger.debug(f"Snapshot at t={target:.6g} after {steps} steps")
    return times, snapshots, steps


def default_speed_range(values: np.ndarray, compatible: bool, margin: float) -> Tuple[float, float]:
    """
    State interval the wave-speed bound must cover.

    Compatible fluxes keep the solution inside the data range; general fluxes
    get the range widened by margin * max(|lo|, |hi|, hi - lo).
    """
    lo, hi = float(np.min(values)), float(np.max(values))
    if compatible:
        return lo, hi
    width = margin * max(abs(lo), abs(hi), hi - lo)
    if width == 0.0:
        width = margin
    return lo - width, hi + width


def union_range(*ranges: Tuple[float, float]) -> Tuple[float, float]:
    return min(r[0] for r in ranges), max(r[1] for r in ranges)
