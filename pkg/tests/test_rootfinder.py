import numpy as np
import pytest

from zigzagspec.errors import WindingError
from zigzagspec.rootfinder import (
    DEFAULT_ROOT_CONFIG,
    ComplexRegion,
    count_zeros,
    locate_zeros,
    newton_polish,
)


def poly_funcs(roots):
    """(f, f'/f) for a monic polynomial with the given roots (with repeats)."""
    roots = np.asarray(roots, dtype=complex)

    def f(z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for r in roots:
            out = out * (z - r)
        return out

    def logderiv(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        # a Newton iterate can land exactly on a root; inf is the honest
        # answer there and newton_polish treats it as convergence
        with np.errstate(divide="ignore", invalid="ignore"):
            for r in roots:
                out = out + 1.0 / (z - r)
        return out

    return f, logderiv


def random_well_separated_roots(rng, n, box=2.0, sep=0.1):
    """Rejection-sample n points in [-box, box]^2 pairwise >= sep apart."""
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(-box, box), rng.uniform(-box, box))
        if all(abs(z - w) >= sep for w in pts):
            pts.append(z)
    return pts


def test_count_zeros_simple_cases():
    region = ComplexRegion(-1.0, 1.0, -1.0, 1.0)
    f, ld = poly_funcs([0.3 + 0.4j])
    assert count_zeros(ld, region, f=f) == 1
    f, ld = poly_funcs([0.3 + 0.4j, -0.5 - 0.2j, 0.0])
    assert count_zeros(ld, region, f=f) == 3
    f, ld = poly_funcs([5.0 + 5.0j])  # outside
    assert count_zeros(ld, region, f=f) == 0


def test_count_zeros_with_multiplicity():
    region = ComplexRegion(-1.0, 1.0, -1.0, 1.0)
    f, ld = poly_funcs([0.2 + 0.1j] * 3)
    assert count_zeros(ld, region, f=f) == 3


def test_count_zeros_logderiv_only_route():
    region = ComplexRegion(-1.0, 1.0, -1.0, 1.0)
    _, ld = poly_funcs([0.3 - 0.4j, -0.6 + 0.1j])
    assert count_zeros(ld, region) == 2


def test_boundary_zero_is_absorbed_by_dilation():
    # root exactly on the requested contour edge
    region = ComplexRegion(-1.0, 1.0, -1.0, 1.0)
    f, ld = poly_funcs([1.0 + 0.3j, 0.0])
    rs = locate_zeros(f, ld, region)
    assert rs.winding == 2
    locs = sorted(rs.locations(), key=abs)
    assert abs(locs[0]) < 1e-9
    assert abs(locs[1] - (1.0 + 0.3j)) < 1e-9


def test_locate_zeros_recovers_known_roots():
    roots = [0.5 + 0.5j, -0.7 + 0.2j, -0.1 - 0.6j, 0.9 - 0.9j]
    f, ld = poly_funcs(roots)
    rs = locate_zeros(f, ld, ComplexRegion(-1.5, 1.5, -1.5, 1.5))
    assert rs.total_multiplicity() == 4
    found = rs.locations()
    for r in roots:
        assert min(abs(r - z) for z in found) < 1e-10


def test_locate_zeros_multiplicity_two():
    roots = [0.25 + 0.25j, 0.25 + 0.25j, -0.5 - 0.3j]
    f, ld = poly_funcs(roots)
    rs = locate_zeros(f, ld, ComplexRegion(-1.0, 1.0, -1.0, 1.0))
    ms = sorted((r.multiplicity, r.location) for r in rs.roots)
    assert [m for m, _ in ms] == [1, 2]
    assert abs(ms[1][1] - (0.25 + 0.25j)) < 1e-9


def test_winding_additivity_is_checked_on_every_cut(monkeypatch):
    import zigzagspec.rootfinder as rf

    cuts = []
    orig = rf._split

    def spy(region, axis, cut):
        cuts.append((axis, cut))
        return orig(region, axis, cut)

    monkeypatch.setattr(rf, "_split", spy)
    roots = [0.5 + 0.5j, -0.7 + 0.2j, -0.1 - 0.6j]
    f, ld = poly_funcs(roots)
    rs = locate_zeros(f, ld, ComplexRegion(-1.5, 1.5, -1.5, 1.5))
    assert rs.total_multiplicity() == 3
    # the solver subdivided, and _solve raises WindingError on any cut whose
    # children windings fail to sum, so reaching here checked each one
    assert len(cuts) >= 2


def test_negative_winding_rejected():
    # 1/(z - a) has a pole: winding -1 must be flagged, not silently returned
    def f(z):
        return 1.0 / (np.asarray(z, dtype=complex) - 0.1)

    def ld(z):
        return -1.0 / (np.asarray(z, dtype=complex) - 0.1)

    with pytest.raises(WindingError):
        locate_zeros(f, ld, ComplexRegion(-1.0, 1.0, -1.0, 1.0))


def test_newton_polish_quadratic_convergence():
    f, ld = poly_funcs([1.0 + 1.0j])
    z = newton_polish(ld, 1.3 + 0.8j)
    assert abs(z - (1.0 + 1.0j)) < 1e-12


def test_newton_polish_multiple_root_needs_multiplicity():
    f, ld = poly_funcs([0.5 + 0.0j] * 2)
    z = newton_polish(ld, 0.7 + 0.1j, multiplicity=2)
    assert abs(z - 0.5) < 1e-9


def test_polynomial_suite_small():
    # the 100-polynomial version with timing lives in the acceptance suite
    rng = np.random.default_rng(424242)
    region = ComplexRegion(-2.5, 2.5, -2.5, 2.5)
    for trial in range(10):
        n = int(rng.integers(2, 6))
        roots = random_well_separated_roots(rng, n)
        if trial % 3 == 0:
            roots[0] = roots[1]  # plant a double root
        f, ld = poly_funcs(roots)
        rs = locate_zeros(f, ld, region)
        assert rs.total_multiplicity() == n
        for r in set(map(complex, roots)):
            best = min(abs(r - z) for z in rs.locations())
            assert best < 1e-9, f"trial {trial}: missed {r} by {best:.2e}"
