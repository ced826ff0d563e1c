"""Delay distributions with mean ``E`` and their Laplace transforms.

Three families are supported:

* ``dirac``   point mass at ``tau = E`` (a single discrete lag)
* ``erlang``  Gamma density with integer shape ``k`` and rate ``k/E``
* ``uniform`` constant density ``1/(2E)`` on ``[0, 2E]``

All transforms are vectorised over ``lam`` and return the analytic
continuation of ``int f(tau) exp(-lam tau) dtau`` (for Erlang this is valid
everywhere except the pole ``lam = -k/E``).  ``E = 0`` is the point mass at
the origin for every family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special, stats

from .errors import DiracNotDiscretizable, PoleReached

FAMILIES = ("dirac", "erlang", "uniform")

# below this |2 lam E| the uniform transform uses its Taylor series
_SERIES_CUTOFF = 1e-2


@dataclass(frozen=True)
class DelayKernel:
    family: str
    expectation: float
    shape: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not (math.isfinite(self.expectation) and self.expectation >= 0):
            raise ValueError(f"expectation must be finite and >= 0, got {self.expectation}")
        if self.family == "erlang" and (int(self.shape) != self.shape or self.shape < 1):
            raise ValueError(f"Erlang shape must be a positive integer, got {self.shape}")
        object.__setattr__(self, "shape", int(self.shape))

    @classmethod
    def dirac(cls, E: float) -> "DelayKernel":
        return cls("dirac", E)

    @classmethod
    def erlang(cls, k: int, E: float) -> "DelayKernel":
        return cls("erlang", E, k)

    @classmethod
    def uniform(cls, E: float) -> "DelayKernel":
        return cls("uniform", E)

    def with_expectation(self, E: float) -> "DelayKernel":
        return replace(self, expectation=E)

    @property
    def is_degenerate(self) -> bool:
        return self.expectation == 0.0

    def density(self, tau):
        """Density at ``tau`` (not defined for point masses)."""
        if self.family == "dirac" or self.is_degenerate:
            raise DiracNotDiscretizable("point-mass kernel has no density")
        tau = np.asarray(tau, dtype=float)
        E = self.expectation
        if self.family == "erlang":
            return stats.gamma.pdf(tau, self.shape, scale=E / self.shape)
        return np.where((tau >= 0) & (tau <= 2 * E), 1.0 / (2 * E), 0.0)

    def describe(self) -> str:
        if self.family == "erlang":
            return f"erlang(k={self.shape}, E={self.expectation:.17g})"
        return f"{self.family}(E={self.expectation:.17g})"


def _as_complex(lam):
    arr = np.asarray(lam, dtype=complex)
    return arr, arr.ndim == 0


def _finish(out, scalar):
    return complex(out) if scalar else out


def _erlang_base(kernel, lam):
    base = 1.0 + lam * kernel.expectation / kernel.shape
    if np.any(base == 0):
        raise PoleReached(f"Erlang transform pole at lam = {-kernel.shape / kernel.expectation}")
    return base


def _g(x):
    """(1 - exp(-x)) / x with its removable singularity filled."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_CUTOFF
    xs, xl = x[small], x[~small]
    out[small] = 1 - xs / 2 + xs**2 / 6 - xs**3 / 24 + xs**4 / 120 - xs**5 / 720
    out[~small] = -np.expm1(-xl) / xl
    return out


def _g_prime(x):
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < _SERIES_CUTOFF
    xs, xl = x[small], x[~small]
    out[small] = -0.5 + xs / 3 - xs**2 / 8 + xs**3 / 30 - xs**4 / 144 + xs**5 / 840
    out[~small] = (np.exp(-xl) * (xl + 1.0) - 1.0) / xl**2
    return out


def transform(kernel: DelayKernel, lam):
    """Laplace transform of the delay density at ``lam``."""
    lam, scalar = _as_complex(lam)
    E = kernel.expectation
    if E == 0.0:
        return _finish(np.ones_like(lam), scalar)
    if kernel.family == "dirac":
        out = np.exp(-lam * E)
    elif kernel.family == "erlang":
        out = _erlang_base(kernel, lam) ** (-kernel.shape)
    else:
        out = _g(2.0 * lam * E)
    return _finish(out, scalar)


def transform_dE(kernel: DelayKernel, lam):
    """Derivative of :func:`transform` with respect to the expectation at fixed ``lam``."""
    lam, scalar = _as_complex(lam)
    E = kernel.expectation
    if kernel.family == "dirac":
        out = -lam * np.exp(-lam * E)
    elif kernel.family == "erlang":
        k = kernel.shape
        out = -lam * _erlang_base(kernel, lam) ** (-(k + 1)) if E else -lam
    else:
        out = 2.0 * lam * _g_prime(2.0 * lam * E)
    return _finish(out, scalar)


def transform_dLambda(kernel: DelayKernel, lam):
    """Derivative of :func:`transform` in ``lam``; equals minus the transform of ``tau f(tau)``."""
    lam, scalar = _as_complex(lam)
    E = kernel.expectation
    if E == 0.0:
        return _finish(np.zeros_like(lam), scalar)
    if kernel.family == "dirac":
        out = -E * np.exp(-lam * E)
    elif kernel.family == "erlang":
        out = -E * _erlang_base(kernel, lam) ** (-(kernel.shape + 1))
    else:
        out = 2.0 * E * _g_prime(2.0 * lam * E)
    return _finish(out, scalar)


def cosine_moment(kernel: DelayKernel, omega):
    """``int f(tau) cos(omega tau) dtau``."""
    return np.real(transform(kernel, 1j * np.asarray(omega, dtype=float)))


def sine_moment(kernel: DelayKernel, omega):
    """``int f(tau) sin(omega tau) dtau``."""
    return -np.imag(transform(kernel, 1j * np.asarray(omega, dtype=float)))


def support_bound(kernel: DelayKernel, epsilon: float) -> float:
    """Smallest ``T`` with tail mass ``int_T^inf f <= epsilon`` (exact end of support when compact)."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    E = kernel.expectation
    if E == 0.0 or kernel.family == "dirac":
        return E
    if kernel.family == "uniform":
        return 2.0 * E
    k = kernel.shape
    return float(special.gammainccinv(k, epsilon)) * E / k


def quadrature_weights(kernel: DelayKernel, dt: float, epsilon: float = 1e-10) -> np.ndarray:
    """Trapezoid weights ``w[j]`` for ``int f(tau) x(t - tau) dtau ~ sum_j w[j] x(t - j dt)``.

    The weights are renormalised to sum to one so constant histories are
    reproduced exactly.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if kernel.family == "dirac":
        raise DiracNotDiscretizable("Dirac kernels are handled by direct history lookup")
    if kernel.is_degenerate:
        return np.ones(1)
    T = support_bound(kernel, epsilon)
    m = int(math.ceil(T / dt - 1e-9))
    tau = dt * np.arange(m + 1)
    w = kernel.density(tau) * dt
    w[0] *= 0.5
    w[-1] *= 0.5
    return w / w.sum()
