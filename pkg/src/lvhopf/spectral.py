"""Characteristic quasi-polynomial of the delayed model and its roots.

The linearisation at the interior equilibrium has characteristic function::

    G(l, E) = l^3 + a1 l^2 + a2 l + a5 + (a3 + a4 l) K_E(l)

with ``K_E`` the Laplace transform of the delay density of mean ``E``.  This
module evaluates ``G`` and its derivatives, computes the frequency bracket
``(0, omega0]`` in which any purely imaginary root must lie, the lower bound
on the first critical expectation, and locates roots numerically (argument
principle + Newton) to find the actual stability boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels as kn
from .contour import Rectangle, winding_number
from .errors import (
    BoundaryRoot,
    BracketNotFound,
    ConvergenceFailure,
    DegenerateRoot,
    NoCrossingFound,
    NoPositiveRoot,
    PoleReached,
    SingularSystem,
)
from .kernels import DelayKernel
from .model import LinearCoeffs, routh_hurwitz

# sup{c : cos x = 1 - c x / pi has a solution x > 0}, to four decimals
C_CONSTANT = 2.2764

ROOT_RESIDUAL_TOL = 1e-10
SLOPE_TOL = 1e-8

# split positions tried (as fractions of the cell) when a root sits on a cut
_SPLIT_FRACTIONS = (0.5, 0.5123, 0.4871, 0.5377, 0.4619, 0.5813, 0.4207, 0.6311)


@dataclass(frozen=True)
class CharRoot:
    lam: complex
    residual: float


@dataclass(frozen=True)
class HopfPoint:
    E_crit: float
    omega_crit: float
    transversal_slope: float
    transversal_ok: bool
    residual: float = 0.0


@dataclass(frozen=True)
class ProofCurves:
    omega0: float
    omega1: float
    E1_bound: float
    c_constant: float = C_CONSTANT


def tangency_constant() -> float:
    """Exact value of the cosine-bound constant.

    At the supremum the line ``1 - c x / pi`` is tangent to ``cos x``, so
    ``x sin x + cos x = 1`` and ``c = pi sin x``.
    """
    x = brentq(lambda x: x * math.sin(x) + math.cos(x) - 1.0, 2.0, 3.0, xtol=1e-15)
    return math.pi * math.sin(x)


# ---------------------------------------------------------------------------
# the characteristic function


def char_eval(coeffs: LinearCoeffs, kernel: DelayKernel, lam):
    K = kn.transform(kernel, lam)
    lam = np.asarray(lam, dtype=complex) if not np.isscalar(lam) else complex(lam)
    c = coeffs
    return ((lam + c.a1) * lam + c.a2) * lam + c.a5 + (c.a3 + c.a4 * lam) * K


def char_dLambda(coeffs: LinearCoeffs, kernel: DelayKernel, lam):
    """Partial derivative of the characteristic function in ``lam``."""
    K = kn.transform(kernel, lam)
    dK = kn.transform_dLambda(kernel, lam)
    lam = np.asarray(lam, dtype=complex) if not np.isscalar(lam) else complex(lam)
    c = coeffs
    return 3 * lam**2 + 2 * c.a1 * lam + c.a2 + (c.a3 + c.a4 * lam) * dK + c.a4 * K


def char_dE(coeffs: LinearCoeffs, kernel: DelayKernel, lam):
    """Partial derivative of the characteristic function in the expectation."""
    dK = kn.transform_dE(kernel, lam)
    lam = np.asarray(lam, dtype=complex) if not np.isscalar(lam) else complex(lam)
    return (coeffs.a3 + coeffs.a4 * lam) * dK


def transversality(coeffs: LinearCoeffs, kernel: DelayKernel, lam: complex) -> complex:
    """Root velocity ``d lam / dE = -G_E / G_lam`` at a simple root ``lam``."""
    g_lam = char_dLambda(coeffs, kernel, lam)
    if abs(g_lam) < 1e-12:
        raise DegenerateRoot(f"|G_lambda| = {abs(g_lam):.3g} at lam = {lam}; root is not simple")
    return -char_dE(coeffs, kernel, lam) / g_lam


def dE_dlambda(coeffs: LinearCoeffs, kernel: DelayKernel, lam: complex) -> complex:
    """``dE/dlam`` assembled from the tau-weighted transform ``int tau f(tau) e^{-lam tau}``.

    This is the reciprocal of :func:`transversality`, built from separately
    computed pieces.
    """
    c = coeffs
    lam = complex(lam)
    K = kn.transform(kernel, lam)
    tau_weighted = -kn.transform_dLambda(kernel, lam)
    num = 3 * lam**2 + 2 * c.a1 * lam + c.a2 + c.a4 * K - c.a3 * tau_weighted - c.a4 * lam * tau_weighted
    dK = kn.transform_dE(kernel, lam)
    den = c.a3 * dK + c.a4 * lam * dK
    return -num / den


# ---------------------------------------------------------------------------
# frequency bracket and the lower bound on E1


def F_of_omega(coeffs: LinearCoeffs, kernel: DelayKernel, omega):
    c = coeffs
    omega = np.asarray(omega, dtype=float)
    C = kn.cosine_moment(kernel, omega)
    S = kn.sine_moment(kernel, omega)
    return (c.a3 * C + c.a4 * omega * S) ** 2 + (-c.a3 * S + c.a4 * omega * C) ** 2


def G_of_omega(coeffs: LinearCoeffs, omega):
    c = coeffs
    omega = np.asarray(omega, dtype=float)
    return (c.a1 * omega**2 - c.a5) ** 2 + (omega**3 - c.a2 * omega) ** 2


def envelope(coeffs: LinearCoeffs, omega):
    """Upper bound ``a3^2 + a4^2 omega^2`` of ``F`` over all delay densities."""
    omega = np.asarray(omega, dtype=float)
    return coeffs.a3**2 + coeffs.a4**2 * omega**2


def omega0_cubic(coeffs: LinearCoeffs) -> np.ndarray:
    """Monic cubic in ``z = omega^2`` whose roots solve ``G = envelope``."""
    c = coeffs
    return np.array(
        [
            1.0,
            c.a1**2 - 2 * c.a2,
            c.a2**2 - 2 * c.a1 * c.a5 - c.a4**2,
            c.a5**2 - c.a3**2,
        ]
    )


def real_cubic_roots(b: float, c: float, d: float) -> list[float]:
    """Real roots of ``z^3 + b z^2 + c z + d`` by the closed form, Newton-polished."""
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    shift = -b / 3.0
    r = 2.0 * math.sqrt(max(-p, 0.0) / 3.0)
    if disc > 0 or p * r == 0.0:
        # one real root, or a triple root blurred by underflow
        s = math.sqrt(max(disc, 0.0))
        roots = [math.copysign(abs(-q / 2 + s) ** (1 / 3), -q / 2 + s)
                 + math.copysign(abs(-q / 2 - s) ** (1 / 3), -q / 2 - s)]
    else:
        arg = max(-1.0, min(1.0, 3.0 * q / (p * r)))
        phi = math.acos(arg) / 3.0
        roots = [r * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
    out = []
    for t in roots:
        z = t + shift
        f = ((z + b) * z + c) * z + d
        for _ in range(3):
            df = (3.0 * z + 2.0 * b) * z + c
            if df == 0.0:
                break
            z_new = z - f / df
            f_new = ((z_new + b) * z_new + c) * z_new + d
            if not abs(f_new) < abs(f):
                break
            z, f = z_new, f_new
        out.append(z)
    return sorted(out)


def omega0(coeffs: LinearCoeffs) -> float:
    """Largest frequency at which ``G`` meets the envelope; bounds every crossing frequency."""
    _, b, c, d = omega0_cubic(coeffs)
    pos = [z for z in real_cubic_roots(b, c, d) if z > 0]
    if not pos:
        raise NoPositiveRoot("the omega0 cubic has no positive root (a3^2 <= a5^2?)")
    return math.sqrt(max(pos))


def omega1(coeffs: LinearCoeffs, kernel: DelayKernel, n_scan: int = 512) -> float:
    """Smallest ``omega`` in ``(0, omega0]`` with ``F(omega) = G(omega)``.

    ``F - G`` is positive at 0 and non-positive at ``omega0``; the endpoint
    sign is imposed (it only fails to hold through rounding) and the first
    sign change on a uniform scan is refined by bisection to machine
    precision.
    """
    w0 = omega0(coeffs)

    def h(w):
        return F_of_omega(coeffs, kernel, w) - G_of_omega(coeffs, w)

    h0 = float(h(0.0))
    if h0 <= 0:
        raise BracketNotFound(f"F(0) - G(0) = {h0} is not positive")
    h_end = float(h(w0))
    if h_end > 1e-9 * float(envelope(coeffs, w0)):
        raise BracketNotFound(f"F - G = {h_end} > 0 at omega0 = {w0}")

    n = n_scan
    while n <= 2**16:
        grid = w0 * np.arange(1, n + 1) / n
        vals = h(grid)
        vals[-1] = min(vals[-1], 0.0)
        idx = np.flatnonzero(vals <= 0)
        if idx.size:
            i = int(idx[0])
            lo = 0.0 if i == 0 else float(grid[i - 1])
            hi = float(grid[i])
            return _bisect_sign(h, lo, hi)
        n *= 2
    raise BracketNotFound("no sign change of F - G on (0, omega0]")


def _bisect_sign(h, lo, hi):
    # invariant: h(lo) > 0, h(hi) <= 0 (at omega0 by fiat); h(hi) is never re-evaluated
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return hi
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid


def crossing_moments(coeffs: LinearCoeffs, omega: float) -> tuple[float, float]:
    """Cosine and sine moments ``(C, S)`` a purely imaginary root ``i omega`` would require.

    Solves the real and imaginary parts of ``G(i omega) = 0``::

        a3 C + a4 w S = a1 w^2 - a5
        a4 w C - a3 S = w^3 - a2 w
    """
    c = coeffs
    M = np.array([[c.a3, c.a4 * omega], [c.a4 * omega, -c.a3]])
    rhs = np.array([c.a1 * omega**2 - c.a5, omega**3 - c.a2 * omega])
    if c.a3**2 + c.a4**2 * omega**2 == 0.0:
        raise SingularSystem("a3 = 0 and a4 * omega = 0")
    C, S = np.linalg.solve(M, rhs)
    return float(C), float(S)


def cos_moment_at_crossing(coeffs: LinearCoeffs, omega1: float) -> float:
    return crossing_moments(coeffs, omega1)[0]


def E1_lower_bound(coeffs: LinearCoeffs, omega1: float, c: float = C_CONSTANT) -> float:
    """Lower bound on the expectation at which ``i omega1`` can be a root.

    Follows from ``int f cos(w tau) >= 1 - c w E / pi``.
    """
    a1, a2, a3, a4, a5 = coeffs.a1, coeffs.a2, coeffs.a3, coeffs.a4, coeffs.a5
    w = omega1
    env = a3**2 + a4**2 * w**2
    num = env + a3 * a5 - w**2 * (a4 * w**2 - a2 * a4 + a1 * a3)
    return math.pi * num / (c * w * env)


def proof_curves(coeffs: LinearCoeffs, kernel: DelayKernel) -> ProofCurves:
    w0 = omega0(coeffs)
    w1 = omega1(coeffs, kernel)
    return ProofCurves(omega0=w0, omega1=w1, E1_bound=E1_lower_bound(coeffs, w1))


# ---------------------------------------------------------------------------
# root counting and location


def _spacing(rect: Rectangle, kernel: DelayKernel) -> float:
    osc = 1.0 + 2.0 * kernel.expectation
    return min(max(rect.width, rect.height) / 32, 0.25 / osc)


def _count(coeffs: LinearCoeffs, kernel: DelayKernel, rect: Rectangle) -> int:
    if kernel.family == "erlang" and not kernel.is_degenerate:
        # clear the order-k pole at -k/E: same zeros, and the phase no longer
        # spins k times faster than the sampling near the pole
        k, E = kernel.shape, kernel.expectation

        def f(z):
            return char_eval(coeffs, kernel, z) * (1.0 + z * E / k) ** k
    else:
        def f(z):
            return char_eval(coeffs, kernel, z)

    try:
        return winding_number(f, rect, spacing=_spacing(rect, kernel))
    except PoleReached as exc:
        raise BoundaryRoot(str(exc)) from exc


def count_roots_in_rectangle(
    coeffs: LinearCoeffs, kernel: DelayKernel, rect: Rectangle, max_nudges: int = 8
) -> int:
    """Number of roots (with multiplicity) inside ``rect``.

    If a root lies on the boundary the rectangle is grown by a tiny margin and
    the count retried.
    """
    r = rect
    for attempt in range(max_nudges + 1):
        try:
            return _count(coeffs, kernel, r)
        except BoundaryRoot:
            eps = 1e-7 * (attempt + 1) * max(rect.width, rect.height)
            r = Rectangle(rect.re_lo - eps, rect.re_hi + eps, rect.im_lo - eps, rect.im_hi + eps)
    raise BoundaryRoot(f"could not move the boundary of {rect} off the roots")


def _split(coeffs, kernel, rect, axis):
    """Cut ``rect`` in two and count the upper/right part; cuts are moved off roots."""
    for frac in _SPLIT_FRACTIONS:
        if axis == "re":
            lo, hi = rect.split_re(rect.re_lo + frac * rect.width)
        else:
            lo, hi = rect.split_im(rect.im_lo + frac * rect.height)
        try:
            return lo, hi, _count(coeffs, kernel, hi)
        except BoundaryRoot:
            continue
    raise BoundaryRoot(f"no root-free cut found for {rect}")


def right_half_plane_radius(coeffs: LinearCoeffs) -> float:
    """Radius beyond which no root with ``Re(lam) >= 0`` can exist (``|K| <= 1`` there)."""
    c = coeffs
    return max(real_cubic_roots(-abs(c.a1), -(abs(c.a2) + abs(c.a4)), -(abs(c.a3) + abs(c.a5))))


def search_window(coeffs: LinearCoeffs) -> Rectangle:
    w0 = omega0(coeffs)
    R = 1.05 * right_half_plane_radius(coeffs)
    im_hi = max(4.0 * w0, R)
    return Rectangle(
        re_lo=min(-5.0 * coeffs.a1 - 1.0, -1.0),
        re_hi=max(1.0, w0, R),
        im_lo=-0.01 * im_hi,
        im_hi=im_hi,
    )


def newton_root(coeffs, kernel, z0: complex, maxiter: int = 60) -> CharRoot:
    z = complex(z0)
    for _ in range(maxiter):
        f = char_eval(coeffs, kernel, z)
        d = char_dLambda(coeffs, kernel, z)
        if d == 0 or not np.isfinite(d):
            break
        step = f / d
        z -= step
        if not np.isfinite(z):
            break
        if abs(step) <= 4e-16 * (1.0 + abs(z)):
            break
    res = abs(char_eval(coeffs, kernel, z)) if np.isfinite(z) else math.inf
    return CharRoot(z, float(res))


def _polish_in_cell(coeffs, kernel, cell: Rectangle, n: int, depth: int = 0) -> CharRoot:
    # Newton from the centre of a tall strip can land on a different root
    slack = 1e-9 * (1.0 + abs(cell.center()))
    root = newton_root(coeffs, kernel, cell.center())
    if root.residual < ROOT_RESIDUAL_TOL and cell.contains(root.lam, slack):
        return root
    if depth > 40:
        raise ConvergenceFailure(f"Newton failed in {cell} (residual {root.residual:.3g})")
    axis = "re" if cell.width >= cell.height else "im"
    lo, hi, n_hi = _split(coeffs, kernel, cell, axis)
    if n_hi > 0:
        return _polish_in_cell(coeffs, kernel, hi, n_hi, depth + 1)
    return _polish_in_cell(coeffs, kernel, lo, n, depth + 1)


def _isolate(coeffs, kernel, cell: Rectangle, n: int) -> list[tuple[Rectangle, int]]:
    if n <= 0:
        return []
    if n == 1 or cell.height < 1e-9:
        return [(cell, n)]
    lo, hi, n_hi = _split(coeffs, kernel, cell, "im")
    return _isolate(coeffs, kernel, lo, n - n_hi) + _isolate(coeffs, kernel, hi, n_hi)


def _rightmost_in(coeffs, kernel, win: Rectangle, strip_tol: float) -> CharRoot:
    n = count_roots_in_rectangle(coeffs, kernel, win)
    if n <= 0:
        raise ConvergenceFailure(f"no characteristic roots inside the search window {win}")
    cell = win
    while cell.width > strip_tol:
        lo, hi, n_hi = _split(coeffs, kernel, cell, "re")
        if n_hi > 0:
            cell, n = hi, n_hi
        else:
            cell = lo
    roots = [_polish_in_cell(coeffs, kernel, c, m) for c, m in _isolate(coeffs, kernel, cell, n)]
    roots = [CharRoot(r.lam.conjugate() if r.lam.imag < 0 else r.lam, r.residual) for r in roots]
    best_re = max(r.lam.real for r in roots)
    ties = [r for r in roots if r.lam.real >= best_re - 1e-10]
    return min(ties, key=lambda r: abs(r.lam.imag))


def rightmost_root(
    coeffs: LinearCoeffs,
    kernel: DelayKernel,
    window: Rectangle | None = None,
    strip_tol: float = 1e-4,
    max_widen: int = 3,
) -> CharRoot:
    """Characteristic root with the largest real part (upper half-plane representative)."""
    win = window or search_window(coeffs)
    for _ in range(max_widen + 1):
        root = _rightmost_in(coeffs, kernel, win, strip_tol)
        near_top = root.lam.imag > win.im_hi - 0.05 * win.height
        near_right = root.lam.real > win.re_hi - 0.05 * win.width
        if not (near_top or near_right):
            return root
        win = Rectangle(win.re_lo, 2 * win.re_hi if near_right else win.re_hi,
                        win.im_lo, 2 * win.im_hi if near_top else win.im_hi)
    return root


def critical_expectation(
    coeffs: LinearCoeffs,
    family: str,
    shape: int = 1,
    E0: float = 0.01,
    E_max: float | None = None,
    tol: float = 1e-8,
    slope_tol: float = SLOPE_TOL,
) -> HopfPoint:
    """First expectation at which the rightmost root reaches the imaginary axis.

    Doubling scan from ``E0`` until the rightmost real part changes sign,
    bisection to ``tol``, then a Newton polish of ``G(i omega, E) = 0`` in the
    two real unknowns ``(E, omega)``.

    Raises
    ------
    NoCrossingFound
        If no sign change occurs up to ``E_max``.  This is not a proof that
        the equilibrium stays stable for larger ``E``.
    """
    stable, _ = routh_hurwitz(coeffs)
    if not stable:
        raise ValueError("equilibrium is not asymptotically stable at E=0")
    base = DelayKernel(family, 0.0, shape)
    window = search_window(coeffs)
    if E_max is None:
        E_max = max(1e3 * E1_lower_bound(coeffs, omega0(coeffs)), 10.0)

    def mu(E):
        return rightmost_root(coeffs, base.with_expectation(E), window).lam.real

    lo, E = 0.0, E0
    while mu(E) < 0:
        lo, E = E, 2 * E
        if E > E_max:
            raise NoCrossingFound(f"no stability change for {family} kernel up to E={E_max:.6g}", E_max)
    hi = E
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mu(mid) < 0:
            lo = mid
        else:
            hi = mid

    E_c = 0.5 * (lo + hi)
    root = rightmost_root(coeffs, base.with_expectation(E_c), window)
    w_c = abs(root.lam.imag)
    E_p, w_p = _polish_crossing(coeffs, base, E_c, w_c)
    if abs(E_p - E_c) <= 10 * tol + 1e-12 and w_p > 0:
        E_c, w_c = E_p, w_p
    if w_c <= 0:
        raise ConvergenceFailure(f"crossing at E={E_c} is through a real root")

    kernel = base.with_expectation(E_c)
    slope = transversality(coeffs, kernel, 1j * w_c).real
    residual = abs(char_eval(coeffs, kernel, 1j * w_c))
    return HopfPoint(E_c, w_c, slope, abs(slope) > slope_tol, residual)


def _polish_crossing(coeffs, base, E, w, maxiter=30):
    for _ in range(maxiter):
        kernel = base.with_expectation(E)
        lam = 1j * w
        g = char_eval(coeffs, kernel, lam)
        if abs(g) < 1e-15:
            break
        gE = char_dE(coeffs, kernel, lam)
        gw = 1j * char_dLambda(coeffs, kernel, lam)
        J = np.array([[gE.real, gw.real], [gE.imag, gw.imag]])
        try:
            dE, dw = np.linalg.solve(J, [-g.real, -g.imag])
        except np.linalg.LinAlgError:
            break
        E, w = E + dE, w + dw
        if E < 0:
            break
        if abs(dE) < 1e-16 * max(1.0, E) and abs(dw) < 1e-16 * max(1.0, w):
            break
    return E, w
