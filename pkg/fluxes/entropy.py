"""
Convex entropy pairs and entropy fluxes.

The entropy flux of a convex U is F_x(u) = integral from a base point to u of
U'(w) d_w f_x(w) dw, evaluated by Gauss-Legendre quadrature split at the kinks of U.
"""
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from fluxes.families import FluxFamily
from geometry.operators import divergence

ScalarMap = Callable[[np.ndarray], np.ndarray]

DEFAULT_ORDER = 8


@dataclass(frozen=True)
class EntropyPair:
    """A convex entropy U with derivative dU; the flux F is built on demand for a FluxFamily."""

    name: str
    U: ScalarMap
    dU: ScalarMap
    kinks: Tuple[float, ...] = ()
    base_point: float = 0.0
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if self.order < 5:
            raise ValueError(f"Quadrature order must be at least 5, got {self.order}")

    def entropy(self, u) -> np.ndarray:
        return self.U(np.asarray(u, dtype=float))

    def flux(self, flux: FluxFamily, x, u) -> np.ndarray:
        """F_x(u) integrated from this pair's base point."""
        return entropy_flux(flux, self, x, u, base=self.base_point)

    def is_convex(self, samples: np.ndarray) -> bool:
        """U' nondecreasing on the sorted samples."""
        slopes = self.dU(np.sort(np.asarray(samples, dtype=float)))
        return bool(np.all(np.diff(slopes) >= -1e-14 * max(1.0, float(np.max(np.abs(slopes))))))


def _quadrature(integrand, a: np.ndarray, b: np.ndarray, kinks: Sequence[float], order: int) -> np.ndarray:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    sign = np.where(b >= a, 1.0, -1.0)
    breaks = [lo] + [np.clip(k, lo, hi) for k in sorted(kinks)] + [hi]
    total = None
    for s0, s1 in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (s1 - s0)
        mid = 0.5 * (s1 + s0)
        w = mid[:, None] + half[:, None] * nodes[None, :]
        part = half[:, None] * np.einsum("q,nqd->nd", weights, integrand(w))
        total = part if total is None else total + part
    return sign[:, None] * total


def entropy_flux(
    flux: FluxFamily,
    pair: Union[EntropyPair, ScalarMap],
    x,
    u,
    order: Optional[int] = None,
    base: float = 0.0,
) -> np.ndarray:
    """
    F_x(u) = integral_base^u U'(w) d_w f_x(w) dw, shape (n, dim).

    Args:
        flux: Flux family f_x
        pair: Entropy pair, or a bare derivative U' (no kinks)
        x: Evaluation points
        u: States (scalar or one per point)
        order: Gauss-Legendre order (defaults to the pair's order)
        base: Lower integration limit; 0 unless stated otherwise
    """
    if isinstance(pair, EntropyPair):
        dU, kinks, order = pair.dU, pair.kinks, order or pair.order
    else:
        dU, kinks, order = pair, (), order or DEFAULT_ORDER
    pts = flux.chart.points(x)
    n = pts.shape[0]
    u = np.broadcast_to(np.asarray(u, dtype=float), (n,))
    a = np.broadcast_to(np.asarray(base, dtype=float), (n,))
    q = order

    def integrand(w):
        xs = np.repeat(pts, q, axis=0)
        du_f = flux.du_evaluate(xs, w.ravel()).reshape(n, q, flux.dim)
        return dU(w)[..., None] * du_f

    return _quadrature(integrand, a, u, kinks, order)


def kruzkov_pair(kappa: float, order: int = DEFAULT_ORDER) -> EntropyPair:
    """
    U(u) = |u - kappa| with flux sgn(u - kappa)(f_x(u) - f_x(kappa)).

    The flux is integrated from kappa, which gives the closed form exactly; sgn(0) = 0.
    """
    kappa = float(kappa)
    return EntropyPair(
        name=f"kruzkov({kappa:.6g})",
        U=lambda u: np.abs(u - kappa),
        dU=lambda u: np.sign(u - kappa),
        kinks=(kappa,),
        base_point=kappa,
        order=order,
    )


def kruzkov_flux(flux: FluxFamily, kappa: float, x, u) -> np.ndarray:
    """Closed-form Kruzkov entropy flux."""
    pts = flux.chart.points(x)
    u = np.broadcast_to(np.asarray(u, dtype=float), (pts.shape[0],))
    return np.sign(u - kappa)[:, None] * (flux.evaluate(pts, u) - flux.evaluate(pts, kappa))


def quadratic_pair(order: int = DEFAULT_ORDER) -> EntropyPair:
    """U(u) = u^2."""
    return EntropyPair(name="square", U=lambda u: u * u, dU=lambda u: 2.0 * u, order=order)


def linear_pair(order: int = DEFAULT_ORDER) -> EntropyPair:
    """U(u) = u; its flux is f_x(u) - f_x(0) and the inequality is the conservation law itself."""
    return EntropyPair(name="mass", U=lambda u: np.asarray(u, dtype=float), dU=lambda u: np.ones_like(u), order=order)


def zero_pair(order: int = DEFAULT_ORDER) -> EntropyPair:
    return EntropyPair(name="zero", U=lambda u: np.zeros_like(u), dU=lambda u: np.zeros_like(u), order=order)


def general_entropy_residual_terms(flux: FluxFamily, pair: EntropyPair, x, u) -> Tuple[np.ndarray, np.ndarray]:
    """
    Entropy flux and the frozen-state divergence (div F)(u) at x.

    For non-compatible fluxes the entropy inequality carries the extra term -(div F)(u);
    for compatible fluxes the divergence vanishes up to finite-difference error.
    """
    pts = flux.chart.points(x)
    u = np.broadcast_to(np.asarray(u, dtype=float), (pts.shape[0],)).copy()
    values = pair.flux(flux, pts, u)
    div = divergence(flux.chart, lambda p: pair.flux(flux, p, u), pts)
    return values, div
