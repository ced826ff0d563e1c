"""Winding numbers of analytic functions around axis-aligned rectangles.

The phase of ``f`` is tracked along the boundary; any segment over which the
phase moves by pi/2 or more is bisected until every increment is small.  The
winding number is then the accumulated phase divided by 2 pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryRoot

MAX_INCREMENT = math.pi / 2
MAX_ROUNDS = 48
MAX_POINTS = 400_000


@dataclass(frozen=True)
class Rectangle:
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    def __post_init__(self):
        if not (self.re_lo < self.re_hi and self.im_lo < self.im_hi):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def width(self) -> float:
        return self.re_hi - self.re_lo

    @property
    def height(self) -> float:
        return self.im_hi - self.im_lo

    def contains(self, z: complex, slack: float = 0.0) -> bool:
        return (
            self.re_lo - slack <= z.real <= self.re_hi + slack
            and self.im_lo - slack <= z.imag <= self.im_hi + slack
        )

    def strictly_contains(self, z: complex) -> bool:
        return self.re_lo < z.real < self.re_hi and self.im_lo < z.imag < self.im_hi

    def on_boundary(self, z: complex, tol: float) -> bool:
        if not self.contains(z, tol):
            return False
        return (
            min(
                abs(z.real - self.re_lo),
                abs(z.real - self.re_hi),
                abs(z.imag - self.im_lo),
                abs(z.imag - self.im_hi),
            )
            <= tol
        )

    def split_re(self, x: float) -> tuple["Rectangle", "Rectangle"]:
        return (
            Rectangle(self.re_lo, x, self.im_lo, self.im_hi),
            Rectangle(x, self.re_hi, self.im_lo, self.im_hi),
        )

    def split_im(self, y: float) -> tuple["Rectangle", "Rectangle"]:
        return (
            Rectangle(self.re_lo, self.re_hi, self.im_lo, y),
            Rectangle(self.re_lo, self.re_hi, y, self.im_hi),
        )

    def center(self) -> complex:
        return complex(0.5 * (self.re_lo + self.re_hi), 0.5 * (self.im_lo + self.im_hi))

    def boundary(self, spacing: float) -> np.ndarray:
        """Closed counter-clockwise polyline (first point repeated at the end)."""
        c = [
            complex(self.re_lo, self.im_lo),
            complex(self.re_hi, self.im_lo),
            complex(self.re_hi, self.im_hi),
            complex(self.re_lo, self.im_hi),
        ]
        pieces = []
        for p, q in zip(c, c[1:] + c[:1]):
            n = max(8, int(math.ceil(abs(q - p) / spacing)))
            pieces.append(p + (q - p) * np.arange(n) / n)
        pieces.append(np.array([c[0]]))
        return np.concatenate(pieces)


def winding_number(func, rect: Rectangle, spacing: float | None = None, zero_tol: float = 1e-12) -> int:
    """Number of times ``func`` winds around 0 along the boundary of ``rect``.

    ``func`` must accept a complex array and be analytic near the boundary.

    Raises
    ------
    BoundaryRoot
        If ``|func|`` drops below ``zero_tol`` on the boundary or the phase
        cannot be resolved.
    """
    if spacing is None:
        spacing = min(rect.width, rect.height) / 16
    z = rect.boundary(spacing)
    f = np.asarray(func(z), dtype=complex)
    scale = max(rect.width, rect.height)

    for _ in range(MAX_ROUNDS):
        if np.any(np.abs(f) < zero_tol) or not np.all(np.isfinite(f)):
            raise BoundaryRoot(f"function vanishes or is singular on the boundary of {rect}")
        dphi = np.angle(f[1:] / f[:-1])
        bad = np.flatnonzero(np.abs(dphi) >= MAX_INCREMENT)
        if bad.size == 0:
            total = dphi.sum() / (2 * math.pi)
            n = int(round(total))
            if abs(total - n) > 1e-3:
                raise BoundaryRoot(f"non-integer winding {total} on {rect}")
            return n
        if z.size + bad.size > MAX_POINTS or np.min(np.abs(z[bad + 1] - z[bad])) < 1e-13 * scale:
            raise BoundaryRoot(f"phase not resolved near {z[bad[0]]} on {rect}")
        mid = 0.5 * (z[bad] + z[bad + 1])
        fmid = np.asarray(func(mid), dtype=complex)
        z = np.insert(z, bad + 1, mid)
        f = np.insert(f, bad + 1, fmid)
    raise BoundaryRoot(f"phase refinement did not converge on {rect}")
