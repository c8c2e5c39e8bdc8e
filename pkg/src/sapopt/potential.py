"""Time-dependent triple-Gaussian-well potential and its calibration.

The trap is three Gaussian dips of common depth ``V0`` and 1/e^2 beam
waist ``2w``::

    V(x,t) = V0 * (1 - sum_k v_k(t) exp(-(x - k d_k(t))^2 / (2 w^2))),

with k in {-1, 0, 1}, d_0 = 0 and v_0 = 1.  ``d_-1`` and ``d_1`` are the
center-to-outer-trap distances (both positive), so the left well sits at
``-d_-1`` and the right well at ``+d_1``.  The depth factors ``v_{+-1}``
are the knobs that keep the three minima in resonance while the traps
approach.

The single-well harmonic frequency is ``omega_x = sqrt(4 V0/(m sigma^2))``
with sigma = 2w the beam waist.
"""
import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .errors import DivergentBoundError, GeometryError

# wells are declared merged when the interior barrier drops within this
# fraction of V0 of a neighbouring minimum (or critical points vanish)
MERGE_GAP_FRACTION = 1e-3


@dataclass(frozen=True)
class TrapLayout:
    """Static geometry of the triple trap plus optional control pulses.

    ``d_m1``/``d_p1``/``v_m1``/``v_p1`` are optional callables of time
    (vectorized over numpy arrays); attaching them turns the layout into a
    full schedule the propagator can sample.
    """
    depth: float                 # V0, J
    waist: float                 # w, m (beam waist is 2w)
    axial_waist: float = None    # w_z, m (2D potential only)
    d_m1: object = None          # t -> separation of the left trap, m
    d_p1: object = None
    v_m1: object = None          # t -> depth factor (defaults to 1)
    v_p1: object = None

    def __post_init__(self):
        if not (self.depth > 0 and self.waist > 0):
            raise ValueError("depth and waist must be positive")
        if self.axial_waist is not None and not self.axial_waist > 0:
            raise ValueError("axial_waist must be positive")

    def omega_x(self, mass):
        """Harmonic frequency of one isolated well, sqrt(4 V0/(m (2w)^2))."""
        return math.sqrt(4.0 * self.depth / (mass * (2.0 * self.waist) ** 2))

    def controls_at(self, t):
        """Sample (d_m1, d_p1, v_m1, v_p1) at time(s) t."""
        one = np.ones_like(np.asarray(t, dtype=float))
        d_m1 = self.d_m1(t) if self.d_m1 is not None else None
        d_p1 = self.d_p1(t) if self.d_p1 is not None else None
        if d_m1 is None or d_p1 is None:
            raise ValueError("layout has no pulses attached")
        v_m1 = self.v_m1(t) if self.v_m1 is not None else one
        v_p1 = self.v_p1(t) if self.v_p1 is not None else one
        return d_m1, d_p1, v_m1, v_p1

    def __call__(self, x, t):
        """Potential V(x, t) in J with the attached pulses."""
        d_m1, d_p1, v_m1, v_p1 = self.controls_at(t)
        return potential_1d(x, self, d_m1, d_p1, v_m1, v_p1)


@dataclass(frozen=True)
class CriticalPoints:
    """The five stationary points of a resolved triple well, ordered."""
    x_left: float
    x_left_max: float
    x_center: float
    x_right_max: float
    x_right: float

    def __post_init__(self):
        seq = (self.x_left, self.x_left_max, self.x_center,
               self.x_right_max, self.x_right)
        if not all(a < b for a, b in zip(seq, seq[1:])):
            raise GeometryError(f"critical points out of order: {seq}")

    @property
    def minima(self):
        return (self.x_left, self.x_center, self.x_right)

    @property
    def maxima(self):
        return (self.x_left_max, self.x_right_max)


@dataclass(frozen=True)
class SapGeometry:
    """Transport end points: rest, far and closest-approach separations."""
    outer_rest: float     # |x_0|, m
    far: float            # |x_0'|, m
    min_separation: float  # delta x_0, m

    def __post_init__(self):
        if not (abs(self.far) > abs(self.outer_rest) > self.min_separation > 0):
            raise ValueError("require |x_0'| > |x_0| > delta_x0 > 0")


def potential_1d(x, layout, d_m1, d_p1, v_m1=1.0, v_p1=1.0):
    """Triple-Gaussian potential at position(s) x, J.  Total function.

    The two side dips are summed before the central one; with IEEE
    commutativity this makes the x -> -x, swap(-1 <-> +1) mirror identity
    hold exactly in floating point.
    """
    x = np.asarray(x, dtype=float)
    inv = 1.0 / (2.0 * layout.waist ** 2)
    sides = (np.multiply(v_m1, np.exp(-(x + d_m1) ** 2 * inv))
             + np.multiply(v_p1, np.exp(-(x - d_p1) ** 2 * inv)))
    return layout.depth * (1.0 - (sides + np.exp(-x ** 2 * inv)))


def potential_1d_derivative(x, layout, d_m1, d_p1, v_m1=1.0, v_p1=1.0):
    """dV/dx of the triple-Gaussian potential, J/m."""
    x = np.asarray(x, dtype=float)
    inv = 1.0 / (2.0 * layout.waist ** 2)
    w2 = layout.waist ** 2
    return layout.depth / w2 * (
        np.multiply(v_m1, (x + d_m1) * np.exp(-(x + d_m1) ** 2 * inv))
        + x * np.exp(-x ** 2 * inv)
        + np.multiply(v_p1, (x - d_p1) * np.exp(-(x - d_p1) ** 2 * inv)))


def potential_1d_second_derivative(x, layout, d_m1, d_p1, v_m1=1.0,
                                   v_p1=1.0):
    """d^2V/dx^2 of the triple-Gaussian potential, J/m^2."""
    x = np.asarray(x, dtype=float)
    w2 = layout.waist ** 2
    inv = 1.0 / (2.0 * w2)

    def term(u, v):
        return v * np.exp(-u ** 2 * inv) * (1.0 - u ** 2 / w2)

    return layout.depth / w2 * (term(x + d_m1, v_m1) + term(x, 1.0)
                                + term(x - d_p1, v_p1))


def potential_2d(x, z, layout, d_m1, d_p1, v_m1=1.0, v_p1=1.0):
    """2D potential: each Gaussian dip acquires the axial envelope
    exp(-z^2/(2 w_z^2)).  x and z broadcast against each other."""
    if layout.axial_waist is None:
        raise ValueError("layout has no axial_waist; 2D potential undefined")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    inv = 1.0 / (2.0 * layout.waist ** 2)
    env = np.exp(-z ** 2 / (2.0 * layout.axial_waist ** 2))
    dips = (np.multiply(v_m1, np.exp(-(x + d_m1) ** 2 * inv))
            + np.exp(-x ** 2 * inv)
            + np.multiply(v_p1, np.exp(-(x - d_p1) ** 2 * inv)))
    return layout.depth * (1.0 - dips * env)


def find_critical_points(layout, d_m1, d_p1, v_m1=1.0, v_p1=1.0,
                         n_scan=4096):
    """Locate the three minima and two interior maxima of V(., t).

    Sign-brackets dV/dx on a dense scan over the region covering all three
    wells, then bisects each bracket to machine tolerance.  Raises
    GeometryError when the five-point structure is lost (wells merged).
    """
    w = layout.waist
    lo, hi = -d_m1 - 3.0 * w, d_p1 + 3.0 * w
    # tiny asymmetric offset so a symmetric root never lands exactly on a
    # scan node (sign test would miss it)
    xs = np.linspace(lo - 0.0043 * w, hi, n_scan)
    f = potential_1d_derivative(xs, layout, d_m1, d_p1, v_m1, v_p1)
    idx = np.nonzero(f[:-1] * f[1:] < 0.0)[0]
    exact = np.nonzero(f == 0.0)[0]

    roots = [xs[i] for i in exact]
    a = xs[idx]
    b = xs[idx + 1]
    fa = f[idx]
    # vectorized bisection over all brackets at once
    for _ in range(100):
        c = 0.5 * (a + b)
        fc = potential_1d_derivative(c, layout, d_m1, d_p1, v_m1, v_p1)
        left = fa * fc <= 0.0
        b = np.where(left, c, b)
        a = np.where(left, a, c)
        fa = np.where(left, fa, fc)
    roots.extend(0.5 * (a + b))
    roots = sorted(roots)
    # dedupe (an exact node hit and a neighbouring bracket can both fire)
    dedup = []
    for r in roots:
        if not dedup or r - dedup[-1] > 1e-9 * w:
            dedup.append(float(r))

    if len(dedup) != 5:
        raise GeometryError(
            f"expected 5 critical points, found {len(dedup)} "
            f"(wells merged at d=({d_m1:.3e}, {d_p1:.3e}) m?)")
    pts = CriticalPoints(*dedup)

    vals = potential_1d(np.array(dedup), layout, d_m1, d_p1, v_m1, v_p1)
    barrier_gap = min(vals[1] - max(vals[0], vals[2]),
                      vals[3] - max(vals[2], vals[4]))
    if barrier_gap < MERGE_GAP_FRACTION * layout.depth:
        raise GeometryError(
            f"interior barrier gap {barrier_gap:.3e} J below merge "
            f"threshold {MERGE_GAP_FRACTION * layout.depth:.3e} J")
    return pts


def calibrate_depths(layout, d_m1, d_p1, refine="auto", n_scan=4096):
    """Depth factors (v_-1, v_1) putting the three minima at one level.

    Solves the 2x2 linear system V(x_L)=V(x_C), V(x_R)=V(x_C) at the roots
    of the v=1 potential (closed-form one-shot, ``refine=0``).  Because the
    minima move once v changes, the one-shot result is only approximate;
    ``refine="auto"`` re-roots with the updated factors and re-solves until
    the re-located minima agree within 1e-6*V0 (at most 5 passes).
    An integer ``refine`` runs exactly that many extra passes.
    """
    auto = refine == "auto"
    max_extra = 5 if auto else int(refine)
    v_m1 = v_p1 = 1.0
    w2 = 2.0 * layout.waist ** 2

    for it in range(max_extra + 1):
        pts = find_critical_points(layout, d_m1, d_p1, v_m1, v_p1,
                                   n_scan=n_scan)
        x_l, x_c, x_r = pts.minima
        em = lambda x: math.exp(-(x + d_m1) ** 2 / w2)   # noqa: E731
        e0 = lambda x: math.exp(-x ** 2 / w2)            # noqa: E731
        ep = lambda x: math.exp(-(x - d_p1) ** 2 / w2)   # noqa: E731
        a11, a12 = em(x_c) - em(x_l), ep(x_c) - ep(x_l)
        a21, a22 = em(x_c) - em(x_r), ep(x_c) - ep(x_r)
        b1, b2 = e0(x_l) - e0(x_c), e0(x_r) - e0(x_c)
        det = a11 * a22 - a12 * a21
        if det == 0.0:
            raise GeometryError("singular calibration system")
        v_m1 = (b1 * a22 - b2 * a12) / det
        v_p1 = (a11 * b2 - a21 * b1) / det
        if auto and _minima_spread(layout, d_m1, d_p1, v_m1, v_p1,
                                   n_scan) < 1e-6 * layout.depth:
            break
    return v_m1, v_p1


def _minima_spread(layout, d_m1, d_p1, v_m1, v_p1, n_scan=4096):
    pts = find_critical_points(layout, d_m1, d_p1, v_m1, v_p1, n_scan=n_scan)
    vals = potential_1d(np.array(pts.minima), layout, d_m1, d_p1, v_m1, v_p1)
    return float(vals.max() - vals.min())


def rabi_frequency(d, ell_x):
    """Tunneling Rabi frequency Omega/omega_x of two harmonic wells.

    Evaluates, with u = d/ell_x,

        Omega/omega_x = 2u * (e^{u^2} (1 + u erfc(u)) - 1)
                        / (sqrt(pi) (e^{2u^2} - 1)),

    in the overflow-safe form obtained by multiplying through e^{-2u^2}.
    Valid strictly for harmonic traps; for Gaussian wells it underestimates
    the actual coupling and serves as a delay-time estimate only.
    """
    from scipy.special import erfc

    u = np.asarray(d, dtype=float) / ell_x
    if np.any(u < 0):
        raise ValueError("separation must be non-negative")
    scalar = u.ndim == 0
    u = np.atleast_1d(u).astype(float)
    # cancellation-free regrouping: the bracket u*erfc(u) - expm1(-u^2)
    # has no subtractive loss, and expm1 keeps the denominator exact for
    # small u; the u -> 0 limit is 1/sqrt(pi)
    num = np.exp(-u ** 2) * (u * erfc(u) - np.expm1(-u ** 2))
    den = math.sqrt(math.pi) * (-np.expm1(-2.0 * u ** 2))
    with np.errstate(invalid="ignore"):
        out = np.where(u == 0.0, 1.0 / math.sqrt(math.pi),
                       2.0 * u * num / np.where(den == 0.0, 1.0, den))
    return float(out[0]) if scalar else out


def adiabatic_delay_bound(pulse_pair, horizon, ell_x, omega_x,
                          n_samples=2001, omega_floor=1e-12):
    """Lower bound 10/min_t Omega on the admissible pulse delay, seconds.

    ``pulse_pair`` is a pair of callables (d_m1, d_p1); the minimum of the
    tunneling rate is taken over both pulses on [0, horizon].
    """
    t = np.linspace(0.0, horizon, n_samples)
    omega_min = np.inf
    for pulse in pulse_pair:
        omega_min = min(omega_min,
                        float(np.min(rabi_frequency(pulse(t), ell_x))))
    omega_min *= omega_x
    if omega_min < omega_floor:
        raise DivergentBoundError(
            f"min tunneling rate {omega_min:.3e} rad/s below floor")
    return 10.0 / omega_min


def single_well_ground_energy_scale(layout, mass):
    """hbar*omega_x/2 of the harmonic expansion, J (diagnostic helper)."""
    return 0.5 * HBAR * layout.omega_x(mass)
