"""Connectivity oracle and the effective percolation model of the dynamics.

A logical string survives a set of single-qubit measurements iff the two
terminals of the matching connectivity graph stay connected once the
measured qubits' edges are deleted; :func:`survives_cut` answers that with
union-find.  The effective model describes the lost-edge fraction under
repeated measurement rounds: Pauli measurements remove edges at rate p_x,
stabilizer rounds reintegrate lost edges with an effective probability that
may require several generator measurements per edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .layout import CodeLayout

__all__ = [
    "FITTED_REINTEGRATION_ALPHAS",
    "EffectiveModelParams",
    "survives_cut",
    "effective_fraction_step",
    "effective_fraction_closed",
    "effective_fraction_fixed_point",
    "effective_ps",
    "effective_ps_meanfield",
    "threshold_x",
]

# Reintegration ansatz coefficients fitted against the simulated threshold
# curve; they sum to one (full restoration at p_s = 1).
FITTED_REINTEGRATION_ALPHAS = (0.5, -0.375, 0.875)


@dataclass(frozen=True)
class EffectiveModelParams:
    """Coefficients alpha(k) of the reintegration ansatz plus the stabilizer
    measurement probability.  alpha(k) is the averaged weight of edges that
    need k generator measurements to come back; the normalized ansatz demands
    sum(alpha) == 1 (alpha(2) of the fitted preset is negative, so the
    coefficients are fit parameters, not probabilities)."""

    alphas: tuple[float, ...] = FITTED_REINTEGRATION_ALPHAS
    p_s: float = 1.0
    normalized: bool = True

    def __post_init__(self):
        if not 0.0 <= self.p_s <= 1.0:
            raise ValueError(f"p_s must be in [0, 1], got {self.p_s}")
        if self.normalized and abs(sum(self.alphas) - 1.0) > 1e-9:
            raise ValueError(
                f"normalized ansatz requires sum(alpha) == 1, got {sum(self.alphas)!r}")


def survives_cut(layout: CodeLayout, basis: str, removed: Iterable[int]) -> bool:
    """True iff the 'basis' logical can still cross the lattice after the
    removed qubits are deleted (basis 'Z': top-bottom graph, cut by X or Y
    measurements; basis 'X': left-right dual graph)."""
    packed = layout.packed()
    b = basis.upper()
    if b == "Z":
        edges, n_v, (ta, tb) = packed["z_edges"], packed["z_n_vertices"], packed["z_terminals"]
    elif b == "X":
        edges, n_v, (ta, tb) = packed["x_edges"], packed["x_n_vertices"], packed["x_terminals"]
    else:
        raise ValueError(f"basis must be 'Z' or 'X', got {basis!r}")
    mask = np.zeros(layout.n_qubits, dtype=np.uint8)
    for q in removed:
        if not 0 <= q < layout.n_qubits:
            raise ValueError(f"removed qubit {q} out of range")
        mask[q] = 1
    return bool(_kernels.uf_terminals_connected(edges, n_v, ta, tb, mask))


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


def effective_fraction_step(f_prev: float, p_x: float, p_s_eff: float) -> float:
    """One discrete update of the lost-edge fraction.

    dF = p_x (1 - F) - p_s_eff F (1 - p_x); the bilinear term accounts for
    edges restored and re-measured within the same round.  The result is
    clamped only against sub-1e-12 float dust.
    """
    _check_prob("f_prev", f_prev)
    _check_prob("p_x", p_x)
    _check_prob("p_s_eff", p_s_eff)
    f = f_prev + f_prev * (p_x * p_s_eff - p_x - p_s_eff) + p_x
    if -1e-12 < f < 0.0:
        f = 0.0
    elif 1.0 < f < 1.0 + 1e-12:
        f = 1.0
    return f


def effective_fraction_closed(t: float, p_x: float, p_s_eff: float) -> float:
    """Continuum solution F(t) = p_x (1 - 1/kappa) exp(-kappa t) + p_x/kappa
    with kappa = p_x + p_s_eff - p_x p_s_eff.

    This is the continuum limit of the discrete recursion (it deviates from
    it by O(kappa^2) per step); quantitative work should iterate
    :func:`effective_fraction_step`.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    _check_prob("p_x", p_x)
    _check_prob("p_s_eff", p_s_eff)
    kappa = p_x + p_s_eff - p_x * p_s_eff
    if kappa <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return p_x * (1.0 - 1.0 / kappa) * math.exp(-kappa * t) + p_x / kappa


def effective_fraction_fixed_point(p_x: float, p_s_eff: float) -> float:
    """Stationary lost-edge fraction p_x / (p_x + p_s_eff - p_x p_s_eff)."""
    _check_prob("p_x", p_x)
    _check_prob("p_s_eff", p_s_eff)
    kappa = p_x + p_s_eff - p_x * p_s_eff
    if kappa <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return p_x / kappa


def effective_ps(params: EffectiveModelParams) -> float:
    """Polynomial reintegration ansatz sum_k alpha(k) p_s^k."""
    return float(sum(a * params.p_s ** (k + 1) for k, a in enumerate(params.alphas)))


def effective_ps_meanfield(f: float, p_s: float) -> float:
    """Mean-field reintegration probability (1 - F) p_s."""
    _check_prob("f", f)
    _check_prob("p_s", p_s)
    return (1.0 - f) * p_s


def threshold_x(p_s: float, mode: str = "ansatz",
                alphas: tuple[float, ...] = FITTED_REINTEGRATION_ALPHAS) -> float:
    """Critical Pauli-measurement rate below which the stationary lost-edge
    fraction stays under one half.

    mode 'ansatz': p_x^c = ps_eff / (1 + ps_eff) with the polynomial ansatz;
    mode 'meanfield': the self-consistent closed form p_s / (2 + p_s).
    """
    _check_prob("p_s", p_s)
    m = mode.lower()
    if m == "ansatz":
        ps_eff = effective_ps(EffectiveModelParams(alphas=tuple(alphas), p_s=p_s))
        return ps_eff / (1.0 + ps_eff)
    if m == "meanfield":
        return p_s / (2.0 + p_s)
    raise ValueError(f"mode must be 'ansatz' or 'meanfield', got {mode!r}")
