"""Brute-force oracle in a truncated number basis.

Everything here is built from ladder matrices and matrix exponentials; none
of it touches the closed-form kernel, so agreement between the two is a
genuine check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply
from scipy.special import eval_genlaguerre, gammaln

from cvbell.core import DimensionMismatchError, SqueezedParams, as_complex_array

MAX_DIM = 200_000
MAX_ORACLE_MODES = 4
DEFAULT_CUTOFFS = {1: 40, 2: 24, 3: 14, 4: 8}
IMAG_TOL = 1e-10


class CutoffError(ValueError):
    """Cutoff too small for the requested check, or Hilbert space too large."""


class TruncationError(RuntimeError):
    """The truncated basis cannot represent the state to the requested accuracy."""


@dataclass(frozen=True)
class FockWorkspace:
    n_modes: int
    cutoff: int
    annihilation: np.ndarray = field(repr=False)
    creation: np.ndarray = field(repr=False)
    parity: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.cutoff**self.n_modes

    def mode_operator(self, op, mode: int) -> sp.csr_matrix:
        """Embed a single-mode (d x d) operator acting on ``mode`` (0-based)."""
        d = self.cutoff
        left = sp.identity(d**mode, format="csr")
        right = sp.identity(d ** (self.n_modes - mode - 1), format="csr")
        return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")

    def photon_numbers(self) -> np.ndarray:
        """(d^N, N) occupation numbers in lexicographic |n_1 ... n_N> order."""
        grids = np.indices((self.cutoff,) * self.n_modes).reshape(self.n_modes, -1)
        return grids.T

    def total_photons(self) -> np.ndarray:
        return self.photon_numbers().sum(axis=1)

    def full_parity(self) -> np.ndarray:
        return (-1.0) ** self.total_photons()


@dataclass(frozen=True)
class GeneratorSet:
    w_plus: sp.csr_matrix
    w_minus: sp.csr_matrix
    b: sp.csr_matrix


@dataclass(frozen=True)
class SqueezedState:
    vector: np.ndarray
    leakage: float
    cutoff: int


def build_workspace(params: SqueezedParams, cutoff: int, max_dim: int = MAX_DIM) -> FockWorkspace:
    if cutoff < 2:
        raise CutoffError(f"cutoff must be >= 2, got {cutoff}")
    n = params.n_modes
    if cutoff**n > max_dim:
        raise CutoffError(f"Hilbert dimension {cutoff}^{n} = {cutoff**n} exceeds cap {max_dim}")
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1)
    for arr in (a, a.T.copy(), np.diag((-1.0) ** np.arange(cutoff))):
        arr.setflags(write=False)
    return FockWorkspace(n, cutoff, a, a.T.copy(), np.diag((-1.0) ** np.arange(cutoff)))


def generator_coefficients(n: int) -> tuple[float, float]:
    """Self-pair and cross-pair weights of the N-mode squeezing generator."""
    return (2 - n) / (2 * n), 2 / n


def build_generators(ws: FockWorkspace) -> GeneratorSet:
    n = ws.n_modes
    x, y = generator_coefficients(n)
    adag = [ws.mode_operator(ws.creation, i) for i in range(n)]
    w_plus = sp.csr_matrix((ws.dim, ws.dim))
    for i in range(n):
        w_plus = w_plus + x * (adag[i] @ adag[i])
        for j in range(i + 1, n):
            w_plus = w_plus + y * (adag[i] @ adag[j])
    w_plus = sp.csr_matrix(w_plus)
    b = sp.diags(ws.total_photons() / 2 + n / 4, format="csr")
    return GeneratorSet(w_plus, sp.csr_matrix(w_plus.T.conj()), b)


def _low_block(ws: FockWorkspace, max_total: int) -> np.ndarray:
    return np.flatnonzero(ws.total_photons() <= max_total)


def _restricted_max(op, rows: np.ndarray) -> float:
    block = sp.csr_matrix(op)[rows][:, rows]
    return float(abs(block).max()) if block.nnz else 0.0


def commutator_residuals(gen: GeneratorSet, ws: FockWorkspace) -> tuple[float, float, float]:
    """Max-magnitude residuals of the three SU(1,1) relations.

    Only states with total photon number <= d - 3 are inspected; above that
    the truncation edge corrupts the products.
    """
    if ws.cutoff < 4:
        raise CutoffError(f"commutator check needs cutoff >= 4, got {ws.cutoff}")
    wp, wm, b = gen.w_plus, gen.w_minus, gen.b
    low = _low_block(ws, ws.cutoff - 3)
    return (
        _restricted_max(wp @ wm - wm @ wp + 2 * b, low),
        _restricted_max(wp @ b - b @ wp + wp, low),
        _restricted_max(wm @ b - b @ wm - wm, low),
    )


def squeezed_state_vector(
    params: SqueezedParams,
    ws: FockWorkspace,
    pad: int = 4,
    leakage_tol: float = 1e-8,
) -> SqueezedState:
    """exp[r(W+ - W-)]|0> restricted to the workspace cutoff.

    The evolution runs in a space padded by ``pad`` levels per mode; the
    norm lost when projecting back onto the cutoff is reported as leakage.
    """
    if params.n_modes != ws.n_modes:
        raise DimensionMismatchError(f"params N={params.n_modes} but workspace N={ws.n_modes}")
    n, d = ws.n_modes, ws.cutoff
    big = FockWorkspace(n, d + pad, *_ladder(d + pad)) if pad else ws
    vac = np.zeros(big.dim)
    vac[0] = 1.0
    if params.r == 0.0:
        psi = vac
    else:
        gen = build_generators(big)
        psi = expm_multiply(params.r * (gen.w_plus - gen.w_minus), vac)
    keep = np.all(big.photon_numbers() < d, axis=1)
    psi = psi[keep]
    norm = float(np.linalg.norm(psi))
    leakage = abs(1.0 - norm)
    if leakage > leakage_tol:
        raise TruncationError(f"cutoff {d} loses {leakage:.3e} of the state norm (tolerance {leakage_tol:g})")
    return SqueezedState(psi / norm, leakage, d)


def _ladder(d: int):
    a = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    return a, a.T.copy(), np.diag((-1.0) ** np.arange(d))


def squeezing_unitary(params: SqueezedParams, ws: FockWorkspace) -> np.ndarray:
    """Dense exp[r(W+ - W-)] on the truncated space."""
    gen = build_generators(ws)
    return scipy.linalg.expm(params.r * (gen.w_plus - gen.w_minus).toarray())


def displacement_matrix(alpha, d: int) -> np.ndarray:
    """Number-basis elements of D(alpha) from the Laguerre closed form.

    <m|D|n> = sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2) for m >= n,
    and the conjugate-reflected expression for m < n. These are the exact
    elements of the infinite matrix, cut to d x d.
    """
    if d < 2:
        raise CutoffError(f"cutoff must be >= 2, got {d}")
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    m, n = np.indices((d, d))
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    z = np.where(m >= n, alpha, -alpha.conjugate())
    log_pref = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - x / 2
    return np.exp(log_pref) * z**k * eval_genlaguerre(lo, k, x)


def displacement_matrix_expm(alpha, d: int, pad: int = 30) -> np.ndarray:
    """D(alpha) as the exponential of alpha a^dag - alpha^* a, in a padded basis."""
    a, adag, _ = _ladder(d + pad)
    alpha = complex(alpha)
    return scipy.linalg.expm(alpha * adag - alpha.conjugate() * a)[:d, :d]


def displaced_parity_matrix(alpha, d: int) -> np.ndarray:
    """D(alpha) (-1)^n D(alpha)^-1 for one mode.

    Parity anticommutes with a, so (-1)^n D(-alpha) = D(alpha) (-1)^n and the
    operator equals D(2 alpha) (-1)^n; its elements need no padding.
    """
    return displacement_matrix(2 * complex(alpha), d) * ((-1.0) ** np.arange(d))[None, :]


def displaced_parity_expectation(state, displacements: Sequence, ws: FockWorkspace) -> float:
    vec = state.vector if isinstance(state, SqueezedState) else np.asarray(state)
    alphas = as_complex_array(displacements)
    if alphas.size != ws.n_modes:
        raise DimensionMismatchError(f"got {alphas.size} displacements for {ws.n_modes} modes")
    d = ws.cutoff
    psi = vec.reshape((d,) * ws.n_modes)
    phi = psi.astype(complex)
    for i, alpha in enumerate(alphas):
        phi = np.moveaxis(np.tensordot(displaced_parity_matrix(alpha, d), phi, axes=([1], [i])), 0, i)
    val = np.vdot(psi, phi)
    if abs(val.imag) > IMAG_TOL:
        raise RuntimeError(f"displaced parity expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def bogoliubov_residual(params: SqueezedParams, ws: FockWorkspace, pad: int = 8) -> float:
    """Largest operator-norm mismatch between V^-1 a_i V and its linear Bogoliubov image.

    Restricted to states with total photon number <= d/2. The columns of V
    for those states are evolved in a basis padded by ``pad`` levels, so the
    truncation edge does not leak into the block.
    """
    if ws.cutoff < 4:
        raise CutoffError(f"Bogoliubov check needs cutoff >= 4, got {ws.cutoff}")
    if params.n_modes != ws.n_modes:
        raise DimensionMismatchError(f"params N={params.n_modes} but workspace N={ws.n_modes}")
    n, d, r = ws.n_modes, ws.cutoff, params.r
    big = FockWorkspace(n, d + pad, *_ladder(d + pad))
    occ = big.photon_numbers()
    low = np.flatnonzero(occ.sum(axis=1) <= d // 2)
    gen = build_generators(big)
    basis = np.zeros((big.dim, low.size))
    basis[low, np.arange(low.size)] = 1.0
    v_low = expm_multiply(r * (gen.w_plus - gen.w_minus), basis) if r else basis
    worst = 0.0
    for i in range(n):
        lhs = v_low.conj().T @ (big.mode_operator(big.annihilation, i) @ v_low)
        partner = (2 - n) / n * big.mode_operator(big.creation, i)
        for j in range(n):
            if j != i:
                partner = partner + (2 / n) * big.mode_operator(big.creation, j)
        rhs = np.cosh(r) * big.mode_operator(big.annihilation, i) + np.sinh(r) * partner
        res = lhs - rhs.toarray()[np.ix_(low, low)]
        worst = max(worst, float(np.linalg.norm(res, 2)))
    return worst
