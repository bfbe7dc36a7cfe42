"""Measurement-only dynamics of the planar surface code.

Simulation of a logical qubit under competing single-qubit Pauli
measurements and stabilizer-generator measurements, together with the
matching percolation and rare-event models and the fitting tools used to
analyze thresholds, scaling collapse and lifetime regimes.
"""

__version__ = "0.1.0"

from .layout import CodeLayout, ConnectivityGraph, build, logical_y_support
from .pauli import PauliOperator, commutes, identity, multiply, single_qubit
from .tableau import CodeState, MeasurementRecord, Status, init_code_state, logical_status

__all__ = [
    "__version__",
    "PauliOperator", "commutes", "multiply", "single_qubit", "identity",
    "CodeLayout", "ConnectivityGraph", "build", "logical_y_support",
    "CodeState", "MeasurementRecord", "Status", "init_code_state", "logical_status",
]
