"""Panel Gauss-Legendre quadrature tuned for radial Hankel-type integrals.

Integrands here are products of a smooth (often logarithmically varying)
radial profile with an oscillatory Bessel factor J0(k r).  Panels are split
at the zeros of J0(k .) and geometrically refined toward the origin, with a
fixed 16-node Gauss-Legendre rule per panel.
"""

from __future__ import annotations

import numpy as np
from scipy.special import jn_zeros

from .errors import QuadratureError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

# enough J0 zeros for any k*r_max this package meets; extended on demand
_J0_ZEROS = jn_zeros(0, 512)


def _j0_zeros_up_to(x: float) -> np.ndarray:
    global _J0_ZEROS
    while _J0_ZEROS[-1] < x:
        _J0_ZEROS = jn_zeros(0, 2 * len(_J0_ZEROS))
    return _J0_ZEROS[_J0_ZEROS < x]


def geometric_bounds(a: float, b: float, per_efold: int = 8,
                     floor_ratio: float = 1e-12) -> np.ndarray:
    """Panel boundaries on [a, b], geometric except for one panel at 0.

    With ``a == 0`` the innermost boundary is placed at ``b * floor_ratio``
    and a single closing panel [0, b*floor_ratio] is prepended.
    """
    if b <= a:
        raise QuadratureError(f"empty quadrature interval [{a}, {b}]")
    lo = max(a, b * floor_ratio)
    n = max(2, int(np.ceil(per_efold * np.log(b / lo))))
    bounds = np.geomspace(lo, b, n + 1)
    if a < lo:
        bounds = np.concatenate(([a], bounds))
    return bounds


def panel_bounds_hankel(a: float, b: float, k: float, per_efold: int = 8,
                        floor_ratio: float = 1e-12) -> np.ndarray:
    """Geometric boundaries merged with the zeros of J0(k .) inside (a, b)."""
    bounds = geometric_bounds(a, b, per_efold, floor_ratio)
    if k > 0.0:
        zeros = _j0_zeros_up_to(k * b) / k
        zeros = zeros[zeros > a]
        bounds = np.unique(np.concatenate((bounds, zeros)))
    return bounds


def gl_nodes_weights(bounds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flattened Gauss-Legendre nodes/weights for a set of panel boundaries."""
    lo = bounds[:-1, None]
    hi = bounds[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * _GL_NODES).ravel()
    weights = (half * _GL_WEIGHTS).ravel()
    return nodes, weights


def integrate_panels(func, bounds: np.ndarray) -> float:
    """Integrate a vectorized callable over the given panel boundaries."""
    nodes, weights = gl_nodes_weights(bounds)
    vals = np.asarray(func(nodes), dtype=float)
    out = float(np.dot(weights, vals))
    if not np.isfinite(out):
        raise QuadratureError("non-finite quadrature result")
    return out
