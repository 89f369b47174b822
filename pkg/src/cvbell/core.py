"""Shared domain types.

Tensor index convention: for N parties, the joint setting word
(k_1, ..., k_N) with k_i in {1, 2} maps to the flat index whose binary
digits are (k_1 - 1, ..., k_N - 1), party 1 being the most significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_MODES = 10
RANGE_SLACK = 1e-12


class DimensionMismatchError(ValueError):
    pass


class NonFiniteError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SqueezedParams:
    n_modes: int
    r: float
    max_modes: int = MAX_MODES

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError(f"n_modes must be an integer >= 1, got {self.n_modes}")
        if self.n_modes > self.max_modes:
            raise ValueError(f"n_modes={self.n_modes} exceeds max_modes={self.max_modes}")
        if not math.isfinite(self.r):
            raise NonFiniteError(f"squeezing parameter r must be finite, got {self.r}")
        object.__setattr__(self, "n_modes", int(self.n_modes))
        object.__setattr__(self, "r", float(self.r))


@dataclass(frozen=True)
class Displacement:
    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise NonFiniteError(f"displacement components must be finite, got ({self.re}, {self.im})")

    @classmethod
    def from_complex(cls, z: complex) -> "Displacement":
        return cls(float(np.real(z)), float(np.imag(z)))

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


def as_complex_array(displacements: Iterable) -> np.ndarray:
    """Coerce Displacements, complex numbers or reals to a complex vector."""
    return np.array([complex(d) for d in displacements], dtype=complex)


@dataclass(frozen=True, eq=False)
class SettingTable:
    """Entry ``settings[i, j]`` is the displacement of party i+1 for setting j+1.

    No finiteness check happens here, so that :func:`validate_setting_table`
    can report the offending index.
    """

    settings: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.settings, dtype=complex)
        if s.ndim != 2 or s.shape[1] != 2:
            raise DimensionMismatchError(f"setting table must have shape (N, 2), got {s.shape}")
        object.__setattr__(self, "settings", _frozen(s))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "SettingTable":
        return cls(np.array([[complex(x) for x in row] for row in rows], dtype=complex))

    @property
    def n_parties(self) -> int:
        return self.settings.shape[0]

    def __getitem__(self, key) -> Displacement:
        return Displacement.from_complex(self.settings[key])

    def to_json(self) -> list:
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.settings]


def validate_setting_table(params: SqueezedParams, table: SettingTable) -> None:
    if table.n_parties != params.n_modes:
        raise DimensionMismatchError(
            f"setting table has {table.n_parties} rows but params.n_modes={params.n_modes}"
        )
    bad = np.argwhere(~np.isfinite(table.settings))
    if bad.size:
        i, j = bad[0]
        raise NonFiniteError(f"non-finite setting at party {i + 1}, setting {j + 1}: {table.settings[i, j]}")


def word_to_index(word: Sequence[int]) -> int:
    """Map a setting word (k_1, ..., k_N), k_i in {1, 2}, to its flat index."""
    idx = 0
    for k in word:
        if k not in (1, 2):
            raise ValueError(f"setting labels must be 1 or 2, got {k}")
        idx = (idx << 1) | (k - 1)
    return idx


def index_to_word(index: int, n: int) -> tuple[int, ...]:
    if not 0 <= index < 2**n:
        raise ValueError(f"index {index} out of range for N={n}")
    return tuple(((index >> (n - 1 - i)) & 1) + 1 for i in range(n))


def setting_bits(n: int) -> np.ndarray:
    """(2^N, N) array of setting bits k_i - 1 in flat-index order."""
    idx = np.arange(2**n)[:, None]
    shifts = np.arange(n - 1, -1, -1)[None, :]
    return (idx >> shifts) & 1


@dataclass(frozen=True, eq=False)
class CorrelationTensor:
    n_modes: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (2**self.n_modes,):
            raise DimensionMismatchError(
                f"correlation tensor for N={self.n_modes} needs {2**self.n_modes} values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise NonFiniteError("correlation tensor contains non-finite values")
        if np.any(np.abs(v) > 1 + RANGE_SLACK):
            worst = int(np.argmax(np.abs(v)))
            raise ValueError(f"correlation {v[worst]} at index {worst} lies outside [-1, 1]")
        object.__setattr__(self, "values", _frozen(v))

    def __getitem__(self, word: Sequence[int]) -> float:
        return float(self.values[word_to_index(word)])


@dataclass(frozen=True, eq=False)
class BellForm:
    """Linear functional over a correlation tensor together with its LHV bound."""

    n_modes: int
    coefficients: np.ndarray = field(repr=False)
    classical_bound: float
    name: str = "form"

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (2**self.n_modes,):
            raise DimensionMismatchError(
                f"form for N={self.n_modes} needs {2**self.n_modes} coefficients, got shape {c.shape}"
            )
        if not self.classical_bound > 0:
            raise ValueError(f"classical_bound must be positive, got {self.classical_bound}")
        object.__setattr__(self, "coefficients", _frozen(c))

    @property
    def algebraic_max(self) -> float:
        return float(np.abs(self.coefficients).sum())
