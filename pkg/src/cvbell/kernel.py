"""Closed-form displaced-parity correlation of the N-mode squeezed vacuum.

For the state exp[r(W+ - W-)]|0> the joint displaced-parity expectation is

    E(alpha) = exp{ -2 cosh(2r) sum_i |a_i|^2
                    + (4/N) sinh(2r) sum_{i<j} (a_i a_j + c.c.)
                    - ((N-2)/N) sinh(2r) sum_i (a_i^2 + c.c.) }

which reduces to exp(-2 sum |a_i|^2) for the vacuum (r = 0).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from cvbell.core import DimensionMismatchError, SqueezedParams, as_complex_array


def kernel_exponent(n: int, r: float, alphas) -> np.ndarray:
    """Exponent of the correlation for an array of displacement tuples.

    ``alphas`` has shape (..., n); the result has shape (...). No clamping is
    applied, so tiny positive values from rounding are visible here.
    """
    a = np.asarray(alphas)
    if a.shape[-1] != n:
        raise DimensionMismatchError(f"expected {n} displacements per tuple, got {a.shape[-1]}")
    c2, s2 = np.cosh(2 * r), np.sinh(2 * r)
    if np.iscomplexobj(a):
        norm2 = np.sum(a.real**2 + a.imag**2, axis=-1)
        total = np.sum(a, axis=-1)
        squares = np.sum(a * a, axis=-1)
        pairs = 0.5 * (total * total - squares)
        return -2 * c2 * norm2 + (8 / n) * s2 * pairs.real - (2 * (n - 2) / n) * s2 * squares.real
    norm2 = np.sum(a * a, axis=-1)
    total = np.sum(a, axis=-1)
    pairs = 0.5 * (total * total - norm2)
    return -2 * c2 * norm2 + (8 / n) * s2 * pairs - (2 * (n - 2) / n) * s2 * norm2


def correlation_batch(n: int, r: float, alphas) -> np.ndarray:
    """Vectorised :func:`squeezed_correlation` over the leading axes of ``alphas``."""
    # the exact exponent is -2 sum |a'_i|^2 <= 0; positive values are rounding
    return np.exp(np.minimum(kernel_exponent(n, r, alphas), 0.0))


def vacuum_correlation(displacements: Sequence) -> float:
    a = as_complex_array(displacements)
    if a.size == 0:
        raise ValueError("vacuum_correlation needs at least one displacement")
    if not np.all(np.isfinite(a)):
        raise ValueError("displacements must be finite")
    return float(np.exp(-2 * np.sum(a.real**2 + a.imag**2)))


def squeezed_correlation(params: SqueezedParams, displacements: Sequence) -> float:
    a = as_complex_array(displacements)
    if a.size != params.n_modes:
        raise DimensionMismatchError(
            f"got {a.size} displacements for a {params.n_modes}-mode state"
        )
    return float(correlation_batch(params.n_modes, params.r, a))


def squeezed_correlation_real4(params: SqueezedParams, displacements: Sequence[float]) -> float:
    """Four-mode correlation for real displacements.

    Uses the simplified form exp{(-2 cosh 2r - sinh 2r) sum a_i^2
    + 2 sinh 2r sum_{i<j} a_i a_j}.
    """
    if params.n_modes != 4:
        raise DimensionMismatchError(f"real four-mode form needs N=4, got N={params.n_modes}")
    x = np.asarray(displacements, dtype=float)
    if x.shape != (4,):
        raise DimensionMismatchError(f"expected 4 real displacements, got shape {x.shape}")
    r = params.r
    pairs = sum(x[i] * x[j] for i in range(4) for j in range(i + 1, 4))
    return float(np.exp((-2 * np.cosh(2 * r) - np.sinh(2 * r)) * np.sum(x**2) + 2 * np.sinh(2 * r) * pairs))
