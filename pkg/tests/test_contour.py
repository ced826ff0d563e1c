import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lvhopf.contour import Rectangle, winding_number
from lvhopf.errors import BoundaryRoot

RECT = Rectangle(-1.0, 1.0, -1.0, 1.0)
points = st.complex_numbers(max_magnitude=2.5, allow_nan=False, allow_infinity=False)


def inside(rect, z, margin=1e-3):
    return rect.re_lo + margin < z.real < rect.re_hi - margin and rect.im_lo + margin < z.imag < rect.im_hi - margin


@given(st.lists(points, min_size=1, max_size=7))
def test_polynomial_zero_count(roots):
    # keep roots away from the contour so the count is well defined
    roots = [z for z in roots if inside(RECT, z) or not RECT.contains(z, 1e-3)]
    if not roots:
        return
    n = winding_number(lambda z: np.prod([z - r for r in roots], axis=0), RECT)
    assert n == sum(inside(RECT, z) for z in roots)


def test_pole_gives_negative_winding():
    assert winding_number(lambda z: (z - 0.3) / (z + 0.2j) ** 3, RECT) == -2


def test_root_on_boundary_raises():
    with pytest.raises(BoundaryRoot):
        winding_number(lambda z: z - 1.0, RECT)


def test_close_root_resolved_by_refinement():
    # coarse initial sampling; the root sits 1e-6 inside the bottom edge
    assert winding_number(lambda z: z - complex(0.1, -1.0 + 1e-6), RECT, spacing=0.5) == 1


def test_boundary_is_closed_and_ccw():
    z = RECT.boundary(0.1)
    assert z[0] == z[-1]
    area = 0.5 * np.sum(z.real[:-1] * z.imag[1:] - z.real[1:] * z.imag[:-1])
    assert area == pytest.approx(RECT.width * RECT.height)


def test_split_and_contains():
    lo, hi = RECT.split_re(0.25)
    assert lo.re_hi == hi.re_lo == 0.25
    assert RECT.strictly_contains(0.5j) and not RECT.strictly_contains(1.0)
    assert RECT.on_boundary(complex(1.0, 0.2), 1e-12)
    with pytest.raises(ValueError):
        Rectangle(1.0, 1.0, 0.0, 1.0)
