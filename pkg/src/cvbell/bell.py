"""Correlation tensors and Bell functionals over them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import hadamard

from cvbell.core import (
    BellForm,
    CorrelationTensor,
    DimensionMismatchError,
    SettingTable,
    SqueezedParams,
    setting_bits,
    validate_setting_table,
    word_to_index,
)
from cvbell.kernel import correlation_batch

ZB_SLACK = 1e-12


@dataclass(frozen=True)
class ZBResult:
    lhs: float
    bound: float

    @property
    def violated(self) -> bool:
        return self.lhs > self.bound + ZB_SLACK


def joint_settings(settings: np.ndarray) -> np.ndarray:
    """(2^N, N) displacements, row w holding alpha_i^{k_i} for the word of index w."""
    settings = np.asarray(settings)
    n = settings.shape[0]
    return settings[np.arange(n)[None, :], setting_bits(n)]


def correlation_tensor(params: SqueezedParams, table: SettingTable) -> CorrelationTensor:
    validate_setting_table(params, table)
    values = correlation_batch(params.n_modes, params.r, joint_settings(table.settings))
    return CorrelationTensor(params.n_modes, values)


def _form(n: int, terms: dict[tuple[int, ...], float], bound: float, name: str) -> BellForm:
    coeffs = np.zeros(2**n)
    for word, c in terms.items():
        coeffs[word_to_index(word)] = c
    return BellForm(n, coeffs, bound, name)


def mermin3_form() -> BellForm:
    """E(1,1,2) + E(1,2,1) + E(2,1,1) - E(2,2,2), LHV bound 2.

    This is the combination whose entries evaluate to E(0,0,0), E(0,a,-a),
    E(a,0,-a) and E(a,a,0) under the settings alpha_1 = alpha_2 = (0, a),
    alpha_3 = (-a, 0).
    """
    return _form(3, {(1, 1, 2): 1, (1, 2, 1): 1, (2, 1, 1): 1, (2, 2, 2): -1}, 2.0, "mermin3")


# sign pattern of the four-party combination, words in flat-index order
_MERMIN4_SIGNS = (
    -1, +1, +1, +1,
    +1, +1, +1, -1,
    +1, +1, +1, -1,
    +1, -1, -1, -1,
)  # fmt: skip


def mermin4_form() -> BellForm:
    return BellForm(4, np.array(_MERMIN4_SIGNS, dtype=float), 4.0, "mermin4")


def chsh_form() -> BellForm:
    return _form(2, {(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): -1}, 2.0, "chsh")


def evaluate_form(form: BellForm, tensor: CorrelationTensor) -> float:
    if form.n_modes != tensor.n_modes:
        raise DimensionMismatchError(f"form is for N={form.n_modes}, tensor for N={tensor.n_modes}")
    return float(form.coefficients @ tensor.values)


@lru_cache(maxsize=None)
def zb_sign_matrix(n: int) -> np.ndarray:
    """Row s, column k holds prod_j s_j^(k_j - 1).

    With s_j = (-1)^(t_j) this is (-1)^(t . b), i.e. the Sylvester Hadamard
    matrix in the flat-index convention.
    """
    h = hadamard(2**n).astype(float)
    h.setflags(write=False)
    return h


def zb_value(n: int, values: np.ndarray) -> float:
    return float(np.abs(zb_sign_matrix(n) @ values).sum())


def zb_lhs(tensor: CorrelationTensor) -> ZBResult:
    return ZBResult(zb_value(tensor.n_modes, tensor.values), float(2**tensor.n_modes))


def ghz_correlation_tensor(n: int, angles) -> CorrelationTensor:
    """cos(sum_j phi_j^{k_j}) for equatorial measurements on the GHZ state."""
    if n < 2:
        raise ValueError(f"GHZ tensor needs n >= 2, got {n}")
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (n, 2):
        raise DimensionMismatchError(f"angles must have shape ({n}, 2), got {angles.shape}")
    return CorrelationTensor(n, np.cos(joint_settings(angles).sum(axis=1)))


def scale_tensor(tensor: CorrelationTensor, v: float) -> CorrelationTensor:
    """Correlations of V|psi><psi| + (1-V) I/2^N: white noise carries no correlation."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    return CorrelationTensor(tensor.n_modes, v * tensor.values)


def deterministic_tensor(outcomes) -> CorrelationTensor:
    """Tensor of a local deterministic strategy; ``outcomes[i, j]`` is party i's +-1 answer to setting j."""
    outcomes = np.asarray(outcomes, dtype=float)
    return CorrelationTensor(outcomes.shape[0], np.prod(joint_settings(outcomes), axis=1))


def closed_form_b3(r: float, a: float) -> float:
    """1 + 2 exp{(-4ch - 8/3 sh - 4/3 sh) a^2} - exp{(-4ch + 8/3 sh - 4/3 sh) a^2}, ch = cosh 2r, sh = sinh 2r."""
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    return float(
        1
        + 2 * np.exp((-4 * ch - 8 / 3 * sh - 4 / 3 * sh) * a * a)
        - np.exp((-4 * ch + 8 / 3 * sh - 4 / 3 * sh) * a * a)
    )


def asymptotic_b3(r: float, a: float) -> float:
    """Large negative r limit of :func:`closed_form_b3`: 3 - exp(-(8/3) e^{-2r} a^2)."""
    return float(3 - np.exp(-8 / 3 * np.exp(-2 * r) * a * a))


def reference_b3_settings(a: float) -> SettingTable:
    return SettingTable.from_rows([[0, a], [0, a], [-a, 0]])
