"""Harvested one-predator/two-prey model with distributed delay.

The system, with a13 = a, a31 = a/2 and the remaining coefficients fixed,
reads::

    x1' = x1 (1 - x1 - x2 - a x3)
    x2' = x2 (1 - 1.5 x1 - x2 - x3)
    x3' = x3 (-1 + (a/2) <f_E * x1> + (1/2) <f_E * x2>) - H

where ``<f_E * x>`` is the convolution of the history of ``x`` against the
delay density.  Everything here concerns the interior equilibrium and the
coefficients of its characteristic equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleParams

A_MIN = 2.0 + math.sqrt(2.0)

RH_CONVENTION = "a2+a4 > 0 (Routh-Hurwitz for the E=0 cubic)"


@dataclass(frozen=True)
class ModelParams:
    """The two free parameters: predation coefficient ``a`` and harvest rate ``H``."""

    a: float
    H: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.H)):
            raise ValueError("model parameters must be finite")
        if self.H < 0:
            raise ValueError(f"harvest rate must be non-negative, got H={self.H}")


@dataclass(frozen=True)
class Equilibrium:
    x1: float
    x2: float
    x3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])


@dataclass(frozen=True)
class LinearCoeffs:
    """Coefficients of ``l^3 + a1 l^2 + a2 l + (a3 + a4 l) K(l) + a5 = 0``."""

    a1: float
    a2: float
    a3: float
    a4: float
    a5: float

    def cubic(self) -> np.ndarray:
        """Coefficients of the E=0 cubic, highest degree first."""
        return np.array([1.0, self.a1, self.a2 + self.a4, self.a3 + self.a5])


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    a_ok: bool
    positivity_ok: bool
    h_threshold: float
    routh_hurwitz_ok: bool
    margins: dict = field(default_factory=dict)
    reason: str = ""
    h_threshold_label: str = "as derived: (a^2 - 4a + 2) / (3a - 2)^2"
    rh_convention: str = RH_CONVENTION


def _quadratic_factor(a: float) -> float:
    return (a - 2.0) * (2.0 * a - 1.0)


def equilibrium_from_x3(a: float, x3: float) -> Equilibrium:
    return Equilibrium(2.0 * (a - 1.0) * x3, 1.0 - (3.0 * a - 2.0) * x3, x3)


def _candidate_x3(params: ModelParams) -> list[float]:
    # roots of q x3^2 - x3 - 2H = 0
    q = _quadratic_factor(params.a)
    H = params.H
    if q == 0.0:
        return [-2.0 * H]
    disc = 1.0 + 8.0 * H * q
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    # (1 + s) / (2q) and the cancellation-free form of (1 - s) / (2q)
    return [(1.0 + s) / (2.0 * q), -4.0 * H / (1.0 + s)]


def compute_equilibrium(params: ModelParams) -> Equilibrium:
    """Return the unique interior equilibrium.

    Both roots of the quadratic for ``x3`` are tried; exactly one must give
    strictly positive components.

    Raises
    ------
    InfeasibleParams
        If ``a <= 2 + sqrt(2)`` or no root (or more than one) yields an
        all-positive equilibrium.
    """
    if not params.a > A_MIN:
        raise InfeasibleParams(f"a <= 2+sqrt(2) (a={params.a})")
    positive = [
        eq
        for eq in (equilibrium_from_x3(params.a, x3) for x3 in _candidate_x3(params))
        if eq.x1 > 0 and eq.x2 > 0 and eq.x3 > 0
    ]
    if len(positive) != 1:
        raise InfeasibleParams(
            f"{len(positive)} equilibria with all components positive "
            f"for a={params.a}, H={params.H}"
        )
    return positive[0]


def harvest_threshold(a: float) -> float:
    """Largest ``H`` keeping ``x2* > 0``: ``(a^2 - 4a + 2) / (3a - 2)^2``."""
    return (a * a - 4.0 * a + 2.0) / (3.0 * a - 2.0) ** 2


def rhs_no_delay(params: ModelParams, state) -> np.ndarray:
    x1, x2, x3 = np.asarray(state, dtype=float)
    return rhs_delayed(params, (x1, x2, x3), x1, x2)


def rhs_delayed(params: ModelParams, state, conv1: float, conv2: float) -> np.ndarray:
    """Right-hand side with the delayed prey averages ``conv1``, ``conv2`` supplied."""
    x1, x2, x3 = np.asarray(state, dtype=float)
    a = params.a
    return np.array(
        [
            x1 * (1.0 - x1 - x2 - a * x3),
            x2 * (1.0 - 1.5 * x1 - x2 - x3),
            x3 * (-1.0 + 0.5 * a * conv1 + 0.5 * conv2) - params.H,
        ]
    )


def jacobian_no_delay(params: ModelParams, eq: Equilibrium) -> np.ndarray:
    a = params.a
    x1, x2, x3 = eq.x1, eq.x2, eq.x3
    return np.array(
        [
            [-x1, -x1, -a * x1],
            [-1.5 * x2, -x2, -x2],
            [0.5 * a * x3, 0.5 * x3, params.H / x3],
        ]
    )


def linear_coeffs(params: ModelParams, eq: Equilibrium) -> LinearCoeffs:
    a = params.a
    x1, x2, x3 = eq.x1, eq.x2, eq.x3
    if x3 == 0.0:
        raise ZeroDivisionError("x3* = 0: coefficients undefined")
    h = params.H / x3
    return LinearCoeffs(
        a1=x1 + x2 - h,
        a2=-0.5 * x1 * x2 - (x1 + x2) * h,
        a3=0.25 * x1 * x2 * x3 * (2.0 * a - 1.0) * (a - 2.0),
        a4=0.5 * (a * a * x1 + x2) * x3,
        a5=0.5 * x1 * x2 * h,
    )


def routh_hurwitz(coeffs: LinearCoeffs) -> tuple[bool, dict]:
    """Routh-Hurwitz test for the E=0 cubic ``l^3 + a1 l^2 + (a2+a4) l + (a3+a5)``.

    Returns the verdict and the slack of each inequality (all must be > 0).
    """
    b1 = coeffs.a1
    b2 = coeffs.a2 + coeffs.a4
    b3 = coeffs.a3 + coeffs.a5
    margins = {
        "a1": b1,
        "a2+a4": b2,
        "a3+a5": b3,
        "a1*(a2+a4)-(a3+a5)": b1 * b2 - b3,
    }
    return all(v > 0 for v in margins.values()), margins


def check_feasibility(params: ModelParams) -> FeasibilityReport:
    a = params.a
    a_ok = a > A_MIN
    h_thr = harvest_threshold(a)
    margins = {"a-(2+sqrt2)": a - A_MIN, "h_threshold-H": h_thr - params.H}

    positivity_ok = False
    eq = None
    for x3 in _candidate_x3(params):
        cand = equilibrium_from_x3(a, x3)
        if cand.x1 > 0 and cand.x2 > 0 and cand.x3 > 0:
            positivity_ok = True
            eq = cand
            break

    reasons = []
    if not a_ok:
        reasons.append("a <= 2+sqrt(2)")
    if not positivity_ok:
        reasons.append("no equilibrium with all components positive")
    feasible = a_ok and positivity_ok

    rh_ok = False
    if feasible:
        rh_ok, rh_margins = routh_hurwitz(linear_coeffs(params, eq))
        margins.update(rh_margins)
    return FeasibilityReport(
        feasible=feasible,
        a_ok=a_ok,
        positivity_ok=positivity_ok,
        h_threshold=h_thr,
        routh_hurwitz_ok=rh_ok,
        margins=margins,
        reason="; ".join(reasons),
    )
