import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgres import (
    BoundaryZero,
    Disk,
    FinderError,
    Rect,
    SecularFunction,
    StepCapExceeded,
    as_log_function,
    localize,
    robust_winding,
    winding_count,
)
from qgres.finder import region_seed
from qgres.secular import LogEval

from conftest import lasso


def poly(roots):
    """Vectorized monic polynomial with the given roots (repeats allowed)."""
    r = np.asarray(roots, dtype=complex)

    def f(ks):
        ks = np.atleast_1d(np.asarray(ks, dtype=complex))
        return np.prod(ks[:, None] - r[None, :], axis=1)

    return f


class _ScaledLog:
    """LogFunction with an explicit O(1) scale so dip detection can fire."""

    def __init__(self, f):
        self._f = f

    def log_values(self, ks):
        v = np.atleast_1d(self._f(np.asarray(ks, dtype=complex)))
        mag = np.abs(v)
        zero = mag == 0
        log_abs = np.where(zero, -np.inf, np.log(np.where(zero, 1.0, mag)))
        phase = np.where(zero, 0j, v / np.where(zero, 1.0, mag))
        return LogEval(log_abs, phase, np.zeros_like(log_abs))


# --- regions -------------------------------------------------------------


def test_rect_requires_positive_extent():
    with pytest.raises(ValueError):
        Rect(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Rect(0.0, 1.0, 2.0, 1.0)


def test_disk_requires_positive_radius():
    with pytest.raises(ValueError):
        Disk(0j, 0.0)


def test_rect_geometry():
    r = Rect(-1.0, 3.0, -2.0, 0.0)
    assert r.center == 1.0 - 1.0j
    assert r.diameter == pytest.approx(np.hypot(4.0, 2.0))
    assert r.contains(0.0 - 1.0j)
    assert r.contains(3.0 + 0.0j)  # closed boundary
    assert not r.contains(3.1 + 0.0j)


def test_rect_boundary_is_counterclockwise():
    r = Rect(-1.0, 1.0, -1.0, 1.0)
    ts = np.linspace(0.0, 1.0, 201)
    z = r.boundary(ts) - r.center
    turns = np.angle(z[1:] * np.conj(z[:-1]))
    assert abs(turns.sum() - 2 * np.pi) < 1e-9
    assert r.boundary(np.array([0.0]))[0] == r.re_min + 1j * r.im_min


def test_disk_boundary_and_bounding_rect():
    d = Disk(1.0 + 2.0j, 1.5)
    z = d.boundary(np.array([0.0, 0.25, 0.5]))
    assert np.allclose(z, [2.5 + 2.0j, 1.0 + 3.5j, -0.5 + 2.0j])
    br = d.bounding_rect()
    assert (br.re_min, br.re_max, br.im_min, br.im_max) == (-0.5, 2.5, 0.5, 3.5)
    assert d.contains(2.5 + 2.0j)
    assert not d.contains(2.51 + 2.0j)


def test_dilated_expands_about_center():
    r = Rect(0.0, 2.0, 0.0, 4.0).dilated(1.5)
    assert (r.re_min, r.re_max, r.im_min, r.im_max) == (-0.5, 2.5, -1.0, 5.0)
    d = Disk(3.0j, 2.0).dilated(1.1)
    assert d.center == 3.0j and d.radius == pytest.approx(2.2)


def test_region_seed_is_stable_and_geometry_sensitive():
    r = Rect(0.0, 1.0, 0.0, 1.0)
    assert region_seed(r) == region_seed(Rect(0.0, 1.0, 0.0, 1.0))
    assert region_seed(r) != region_seed(Rect(0.0, 1.0, 0.0, 2.0))
    assert region_seed(r) != region_seed(r, salt=1)
    assert region_seed(Disk(0j, 1.0)) == region_seed(Disk(0j, 1.0))


def test_as_log_function_passthrough_and_wrap():
    sf = SecularFunction.from_graph(lasso())
    assert as_log_function(sf) is sf
    wrapped = as_log_function(poly([1.0]))
    ev = wrapped.log_values(np.array([3.0, 1.0]))
    assert ev.log_abs[0] == pytest.approx(np.log(2.0))
    assert ev.log_abs[1] == -np.inf
    assert ev.phase[1] == 0


# --- winding -------------------------------------------------------------


def test_winding_counts_zeros_with_multiplicity():
    square = Rect(-1.0, 1.0, -1.0, 1.0)
    assert winding_count(as_log_function(poly([0.2 + 0.1j])), square) == 1
    f = as_log_function(poly([0.5, 0.5, -0.3j]))
    assert winding_count(f, square) == 3
    assert winding_count(as_log_function(poly([2.0 + 2.0j])), square) == 0
    const = as_log_function(lambda ks: np.full(np.shape(ks), 1.5 + 0.5j))
    assert winding_count(const, square) == 0


def test_winding_on_disk():
    f = as_log_function(poly([0.0, 1.5]))
    assert winding_count(f, Disk(0j, 1.0)) == 1
    assert winding_count(f, Disk(0j, 2.0)) == 2


def test_winding_raises_on_exact_boundary_zero():
    # t=0 of this square is the corner, an exact sample hitting the zero
    f = as_log_function(poly([-1.0 - 1.0j]))
    with pytest.raises(BoundaryZero):
        winding_count(f, Rect(-1.0, 1.0, -1.0, 1.0))


def test_winding_raises_on_near_boundary_dip():
    # zero hugging the bottom edge at a separation far below sample spacing
    f = _ScaledLog(poly([0.5 + 1e-10j]))
    with pytest.raises(BoundaryZero):
        winding_count(f, Rect(0.0, 1.0, 0.0, 1.0))


def test_winding_respects_sample_cap():
    class Stiff:
        phase_rate = 1e4
        poly_degree = 0

        def log_values(self, ks):
            return as_log_function(poly([10.0 + 10.0j])).log_values(ks)

    with pytest.raises(StepCapExceeded):
        winding_count(Stiff(), Rect(0.0, 1.0, 0.0, 1.0), max_samples=1000)


def test_robust_winding_dilates_past_contour_zero():
    f = as_log_function(poly([-1.0 - 1.0j, 0.0]))
    count, used = robust_winding(f, Rect(-1.0, 1.0, -1.0, 1.0))
    # the corner zero is swallowed by the outward dilation
    assert count == 2
    assert used.re_min < -1.0
    # determinism: the same call gives the same dilation
    count2, used2 = robust_winding(f, Rect(-1.0, 1.0, -1.0, 1.0))
    assert (count2, used2) == (count, used)


def test_robust_winding_gives_up_on_persistent_zero():
    # scale-covariant family: f(z) = z stays zero at the center of every
    # dilation of a contour through the origin -- not rescuable outward
    f = as_log_function(poly([1.0 + 0.0j]))

    class AlwaysDip:
        def log_values(self, ks):
            ev = f.log_values(ks)
            return LogEval(
                np.full_like(ev.log_abs, -50.0), ev.phase, np.zeros_like(ev.log_abs)
            )

    with pytest.raises(BoundaryZero):
        robust_winding(AlwaysDip(), Rect(0.0, 1.0, 0.0, 1.0))


# --- localization --------------------------------------------------------


def test_localize_simple_roots():
    roots = [0.3 + 0.2j, -0.5 - 0.4j, 1.2 - 1.1j]
    found = localize(poly(roots), Rect(-2.0, 2.0, -2.0, 2.0))
    assert [r.multiplicity for r in found] == [1, 1, 1]
    got = sorted((r.k for r in found), key=lambda z: (z.real, z.imag))
    want = sorted(roots, key=lambda z: (z.real, z.imag))
    assert all(abs(a - b) < 1e-8 for a, b in zip(got, want))


def test_localize_reports_multiplicities():
    found = localize(
        poly([0.5 + 0.5j, 0.5 + 0.5j, 0.5 + 0.5j, -1.0j]),
        Rect(-2.0, 2.0, -2.0, 2.0),
    )
    by_mult = {r.multiplicity: r.k for r in found}
    assert set(by_mult) == {1, 3}
    assert abs(by_mult[3] - (0.5 + 0.5j)) < 1e-8
    assert abs(by_mult[1] - (-1.0j)) < 1e-8


@pytest.mark.parametrize("m", [2, 3, 5, 8])
def test_localize_high_multiplicity_stays_sharp(m):
    # plain finite-difference polishing stalls at (noise)^(1/m); the
    # circle-integral refinement must hold the line at any multiplicity
    a = -3.7 + 2.2j
    found = localize(poly([a] * m), Rect(-5.0, -2.0, 1.0, 4.0))
    assert len(found) == 1
    assert found[0].multiplicity == m
    assert abs(found[0].k - a) < 1e-10


def test_localize_merges_nearly_coincident_roots():
    a, b = 0.25 - 0.25j, 0.25 - 0.25j + 1e-9
    found = localize(poly([a, b]), Rect(0.0, 1.0, -1.0, 0.0))
    assert len(found) == 1
    assert found[0].multiplicity == 2
    assert abs(found[0].k - a) < 1e-8


def test_localize_disk_excludes_bounding_rect_corners():
    # both roots sit in the bounding square, only one in the disk
    found = localize(poly([0.1 + 0.1j, 0.9 + 0.9j]), Disk(0j, 1.0))
    assert len(found) == 1
    assert abs(found[0].k - (0.1 + 0.1j)) < 1e-8


def test_localize_output_is_sorted_and_deterministic():
    f = poly([0.7 - 0.1j, -0.8 + 0.3j, 0.1 + 0.6j, 0.1 - 0.9j])
    region = Rect(-1.5, 1.5, -1.5, 1.5)
    found = localize(f, region)
    keys = [(r.k.real, r.k.imag) for r in found]
    assert keys == sorted(keys)
    assert localize(f, region) == found


def test_localize_empty_region():
    assert localize(poly([5.0 + 5.0j]), Rect(-1.0, 1.0, -1.0, 1.0)) == ()


def test_localize_works_on_secular_functions():
    sf = SecularFunction.from_graph(lasso(0.0))
    found = localize(sf, Rect(5.0, 8.0, -1.0, 1.0))
    # only the 2*pi lattice point falls in this window
    assert len(found) == 1
    assert found[0].multiplicity == 1
    assert abs(found[0].k - 2 * np.pi) < 1e-8


@settings(max_examples=10, deadline=None)
@given(
    st.lists(
        st.complex_numbers(
            min_magnitude=0.0, max_magnitude=1.8, allow_nan=False, allow_infinity=False
        ),
        min_size=1,
        max_size=5,
    )
)
def test_localize_recovers_random_well_separated_roots(raw):
    roots: list[complex] = []
    for z in raw:  # keep roots apart so identities are unambiguous
        if all(abs(z - r) > 0.2 for r in roots):
            roots.append(z)
    region = Rect(-2.0, 2.0, -2.0, 2.0)
    found = localize(poly(roots), region)
    assert sum(r.multiplicity for r in found) == len(roots)
    for want in roots:
        assert min(abs(r.k - want) for r in found) < 1e-8
