import math

import mpmath
import numpy as np
import pytest

from sapopt.constants import HBAR, KB
from sapopt.core import RB85
from sapopt.errors import DivergentBoundError, GeometryError
from sapopt.potential import (SapGeometry, TrapLayout, adiabatic_delay_bound,
                              calibrate_depths, find_critical_points,
                              potential_1d, potential_1d_derivative,
                              potential_1d_second_derivative, potential_2d,
                              rabi_frequency)

LAYOUT = TrapLayout(depth=KB * 86e-9, waist=0.65e-6)
MASS = RB85.mass
OMEGA = LAYOUT.omega_x(MASS)
ELL = math.sqrt(HBAR / (MASS * OMEGA))


def test_fig1_trap_frequency():
    # V0 = kB*86 nK, beam waist 1.3 um, 85Rb: omega_x ~= 2 pi x 711 Hz
    assert OMEGA / (2 * np.pi) == pytest.approx(711.0, abs=1.0)


def test_lone_central_well_minimum():
    assert potential_1d(0.0, LAYOUT, 6.5e-6, 6.5e-6, 0.0, 0.0) == 0.0


def test_asymptote():
    v = potential_1d(np.array([-60e-6, 60e-6]), LAYOUT, 6.5e-6, 6.5e-6)
    assert np.allclose(v, LAYOUT.depth, rtol=1e-12)


def test_mirror_symmetry():
    x = np.linspace(-8e-6, 8e-6, 257)
    lhs = potential_1d(x, LAYOUT, 2.0e-6, 3.0e-6, 1.1, 0.9)
    rhs = potential_1d(-x, LAYOUT, 3.0e-6, 2.0e-6, 0.9, 1.1)
    assert np.array_equal(lhs, rhs)


def test_derivatives_match_finite_differences():
    xs = np.linspace(-4e-6, 4e-6, 17)
    h = 1e-11
    for x in xs:
        fd1 = (potential_1d(x + h, LAYOUT, 2e-6, 2.5e-6, 1.05, 0.97)
               - potential_1d(x - h, LAYOUT, 2e-6, 2.5e-6, 1.05, 0.97)) \
            / (2 * h)
        an1 = potential_1d_derivative(x, LAYOUT, 2e-6, 2.5e-6, 1.05, 0.97)
        assert fd1 == pytest.approx(an1, rel=1e-5, abs=1e-32)
        fd2 = (potential_1d(x + h, LAYOUT, 2e-6, 2.5e-6, 1.05, 0.97)
               - 2 * potential_1d(x, LAYOUT, 2e-6, 2.5e-6, 1.05, 0.97)
               + potential_1d(x - h, LAYOUT, 2e-6, 2.5e-6, 1.05, 0.97)) / h**2
        an2 = potential_1d_second_derivative(x, LAYOUT, 2e-6, 2.5e-6,
                                             1.05, 0.97)
        assert fd2 == pytest.approx(an2, rel=2e-3, abs=1e-26)


def test_2d_on_axis_reduction():
    lay = TrapLayout(depth=LAYOUT.depth, waist=LAYOUT.waist,
                     axial_waist=3e-6)
    x = np.linspace(-7e-6, 7e-6, 31)
    assert np.allclose(potential_2d(x, 0.0, lay, 3e-6, 3e-6),
                       potential_1d(x, lay, 3e-6, 3e-6), rtol=1e-14)


def test_2d_separability_limit():
    # z within the beam-waist scale: the axial envelope is flat to 1e-12
    lay = TrapLayout(depth=LAYOUT.depth, waist=LAYOUT.waist,
                     axial_waist=1e6 * LAYOUT.waist)
    x = np.linspace(-6e-6, 6e-6, 11)
    z = np.linspace(-LAYOUT.waist, LAYOUT.waist, 11)
    v2 = potential_2d(x[:, None], z[None, :], lay, 3e-6, 3e-6)
    v1 = potential_1d(x, lay, 3e-6, 3e-6)
    assert np.max(np.abs(v2 - v1[:, None])) < 1e-12 * LAYOUT.depth


def test_2d_axial_frequency_ratio():
    # curvature ratio omega_z/omega_x equals w/w_z (checked by second
    # differences of the 2D potential at the origin)
    lay = TrapLayout(depth=LAYOUT.depth, waist=LAYOUT.waist,
                     axial_waist=4.0 * LAYOUT.waist)
    h = 1e-9
    d = 6.5e-6

    def vx(x):
        return potential_2d(x, 0.0, lay, d, d, 0.0, 0.0)

    def vz(z):
        return potential_2d(0.0, z, lay, d, d, 0.0, 0.0)

    cxx = (vx(h) - 2 * vx(0.0) + vx(-h)) / h ** 2
    czz = (vz(h) - 2 * vz(0.0) + vz(-h)) / h ** 2
    ratio = math.sqrt(czz / cxx)
    assert ratio == pytest.approx(lay.waist / lay.axial_waist, rel=1e-3)


def test_critical_points_symmetric():
    pts = find_critical_points(LAYOUT, 3e-6, 3e-6)
    assert abs(pts.x_center) < 1e-18
    assert pts.x_left == pytest.approx(-pts.x_right, abs=1e-18)
    assert pts.x_left_max == pytest.approx(-pts.x_right_max, abs=1e-18)


def test_critical_points_far_separation():
    # negligible gaussian cross-talk: minima sit at the trap centers
    pts = find_critical_points(LAYOUT, 6.5e-6, 6.5e-6)
    assert pts.x_left == pytest.approx(-6.5e-6, abs=1e-12)
    assert pts.x_right == pytest.approx(6.5e-6, abs=1e-12)
    assert pts.x_center == pytest.approx(0.0, abs=1e-12)


def test_critical_point_residuals():
    pts = find_critical_points(LAYOUT, 2.0e-6, 2.4e-6, 1.02, 0.95)
    tol = 1e-12 * LAYOUT.depth / LAYOUT.waist
    for x in (pts.x_left, pts.x_left_max, pts.x_center, pts.x_right_max,
              pts.x_right):
        assert abs(potential_1d_derivative(x, LAYOUT, 2.0e-6, 2.4e-6,
                                           1.02, 0.95)) < tol


def test_merged_wells_raise():
    with pytest.raises(GeometryError):
        find_critical_points(LAYOUT, 0.2 * LAYOUT.waist, 0.2 * LAYOUT.waist)


def test_calibration_symmetric_case():
    vm, vp = calibrate_depths(LAYOUT, 1.43e-6, 1.43e-6)
    assert vm == pytest.approx(vp, rel=1e-12)


def test_calibration_far_separation():
    vm, vp = calibrate_depths(LAYOUT, 6.5e-6, 6.5e-6)
    assert vm == pytest.approx(1.0, abs=1e-6)
    assert vp == pytest.approx(1.0, abs=1e-6)


def test_calibration_against_direct_linear_solve():
    # the closed form must reproduce an independent numpy 2x2 solve built
    # from the same equal-minima conditions at the v=1 roots
    d_m1, d_p1 = 1.6e-6, 2.1e-6
    pts = find_critical_points(LAYOUT, d_m1, d_p1)
    w2 = 2 * LAYOUT.waist ** 2
    em = lambda x: math.exp(-(x + d_m1) ** 2 / w2)   # noqa: E731
    e0 = lambda x: math.exp(-x ** 2 / w2)            # noqa: E731
    ep = lambda x: math.exp(-(x - d_p1) ** 2 / w2)   # noqa: E731
    x_l, x_c, x_r = pts.minima
    a = np.array([[em(x_c) - em(x_l), ep(x_c) - ep(x_l)],
                  [em(x_c) - em(x_r), ep(x_c) - ep(x_r)]])
    b = np.array([e0(x_l) - e0(x_c), e0(x_r) - e0(x_c)])
    expected = np.linalg.solve(a, b)
    got = calibrate_depths(LAYOUT, d_m1, d_p1, refine=0)
    assert got[0] == pytest.approx(expected[0], rel=1e-12)
    assert got[1] == pytest.approx(expected[1], rel=1e-12)


@pytest.mark.parametrize("d_m1,d_p1", [(1.43e-6, 1.43e-6),
                                       (1.6e-6, 2.3e-6),
                                       (2.5e-6, 2.5e-6)])
def test_calibrated_minima_equal(d_m1, d_p1):
    vm, vp = calibrate_depths(LAYOUT, d_m1, d_p1)
    pts = find_critical_points(LAYOUT, d_m1, d_p1, vm, vp)
    vals = potential_1d(np.array(pts.minima), LAYOUT, d_m1, d_p1, vm, vp)
    assert vals.max() - vals.min() < 1e-6 * LAYOUT.depth


def test_calibration_across_sap_schedule():
    # equal minima hold on every schedule sample with separations >= dx0
    from sapopt.pulses import SapGuessPair
    pair = SapGuessPair(horizon=31.4e-3, t_delay=0.17 * 31.4e-3,
                        x0=2.5e-6, dx0=1.43e-6)
    for t in np.linspace(0, 31.4e-3, 17):
        d_m1, d_p1 = float(pair.d_m1(t)), float(pair.d_p1(t))
        vm, vp = calibrate_depths(LAYOUT, d_m1, d_p1)
        pts = find_critical_points(LAYOUT, d_m1, d_p1, vm, vp)
        vals = potential_1d(np.array(pts.minima), LAYOUT, d_m1, d_p1, vm, vp)
        assert vals.max() - vals.min() < 1e-6 * LAYOUT.depth


def test_rabi_small_separation_limit():
    assert rabi_frequency(0.0, ELL) == pytest.approx(1 / math.sqrt(math.pi),
                                                     abs=1e-15)
    assert rabi_frequency(1e-6 * ELL, ELL) == pytest.approx(
        1 / math.sqrt(math.pi), abs=1e-6)


def test_rabi_vanishes_at_large_separation():
    assert rabi_frequency(10 * ELL, ELL) < 1e-10


def test_rabi_against_arbitrary_precision_oracle():
    # same formula evaluated with 50-digit arithmetic
    mpmath.mp.dps = 50
    u = mpmath.mpf(2)
    num = mpmath.e ** (u ** 2) * (1 + u * (1 - mpmath.erf(u))) - 1
    den = mpmath.sqrt(mpmath.pi) * (mpmath.e ** (2 * u ** 2) - 1)
    oracle = float(2 * u * num / den)
    assert rabi_frequency(2 * ELL, ELL) == pytest.approx(oracle, abs=1e-10)


def test_rabi_unimodal_decreasing():
    u = np.linspace(1.0, 12.0, 1000)
    vals = rabi_frequency(u * ELL, ELL)
    assert np.all(vals >= 0)
    assert np.all(np.diff(vals) < 0)


def test_adiabatic_delay_bound():
    const_pulse = lambda t: np.full_like(np.asarray(t, float), 1.43e-6)  # noqa: E731
    bound = adiabatic_delay_bound((const_pulse, const_pulse), 31.4e-3,
                                  ELL, OMEGA)
    direct = 10.0 / (rabi_frequency(1.43e-6, ELL) * OMEGA)
    assert bound == pytest.approx(direct, rel=1e-12)
    # doubling all separations strictly increases the bound
    base = lambda t: np.full_like(np.asarray(t, float), 0.8e-6)  # noqa: E731
    wide = lambda t: np.full_like(np.asarray(t, float), 1.6e-6)  # noqa: E731
    assert (adiabatic_delay_bound((wide, wide), 31.4e-3, ELL, OMEGA)
            > adiabatic_delay_bound((base, base), 31.4e-3, ELL, OMEGA))


def test_adiabatic_delay_bound_divergence():
    huge = lambda t: np.full_like(np.asarray(t, float), 40 * ELL)  # noqa: E731
    with pytest.raises(DivergentBoundError):
        adiabatic_delay_bound((huge, huge), 1.0, ELL, OMEGA)


def test_sap_geometry_invariants():
    SapGeometry(outer_rest=2.5e-6, far=6.5e-6, min_separation=1.43e-6)
    with pytest.raises(ValueError):
        SapGeometry(outer_rest=6.5e-6, far=2.5e-6, min_separation=1.43e-6)
