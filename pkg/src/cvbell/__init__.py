"""Displaced-parity Bell tests for N-mode squeezed vacuum states."""

from cvbell.core import (
    BellForm,
    CorrelationTensor,
    Displacement,
    SettingTable,
    SqueezedParams,
    validate_setting_table,
)

__version__ = "0.1.0"

__all__ = [
    "BellForm",
    "CorrelationTensor",
    "Displacement",
    "SettingTable",
    "SqueezedParams",
    "validate_setting_table",
    "__version__",
]
