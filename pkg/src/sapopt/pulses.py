"""Control-pulse families for the three-step transport.

Separation pulses are positive distances (the left trap sits at -d_m1(t),
the right trap at +d_p1(t)); every family is an immutable callable,
vectorized over numpy time arrays.

Families:

* ``HarmonicGuessPulse`` -- the moving-harmonic-trap optimum used as the
  step-1 guess: exact (infidelity 0) for a purely harmonic trap.
* ``BangGuessPulse`` -- piecewise parabola/line/parabola displacement with
  maximum velocity 3 dx/(2 T1), the condensate step-1 guess.
* ``SapGuessPair`` / ``SapCrabPair`` -- counterintuitive cos^2 approach
  sequences of the adiabatic-passage step; the right trap dips first and
  the pair is exactly time-reversal dual, d_p1(t) = d_m1(T2 - t).
* ``CrabBasis`` -- truncated trigonometric modulation g(t) with a boundary
  regularizer that pins g to 1 at the support endpoints.
* ``apply_shake`` -- sinusoidal in-phase jitter of both outer traps for
  robustness studies.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CrabBasis:
    """Truncated trigonometric modulation of a guess pulse.

    g(t) = 1 + (1/lambda(t)) sum_k [A_k sin(w_k t) + B_k cos(w_k t)]
    on the open support (t_a, t_b), with the rational regularizer
    lambda(t) = S^2 / ((t - t_a)(t_b - t)), S = t_b - t_a, which diverges
    at both endpoints so g -> 1 there; g is exactly 1 outside the support.
    """
    horizon: float
    a_coefficients: np.ndarray
    b_coefficients: np.ndarray
    frequencies: np.ndarray = None   # rad/s, defaults to harmonics 2 pi k/T
    support: tuple = None            # (t_a, t_b), defaults to (0, horizon)

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a_coefficients, dtype=float))
        b = np.atleast_1d(np.asarray(self.b_coefficients, dtype=float))
        if a.shape != b.shape or a.ndim != 1 or a.size < 1:
            raise ValueError("A and B coefficient arrays must match, N_g >= 1")
        if self.frequencies is None:
            k = np.arange(1, a.size + 1)
            freqs = 2.0 * np.pi * k / self.horizon
        else:
            freqs = np.asarray(self.frequencies, dtype=float)
        if freqs.shape != a.shape or np.any(freqs <= 0) \
                or np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be positive strictly increasing")
        support = self.support if self.support is not None \
            else (0.0, self.horizon)
        if not support[1] > support[0]:
            raise ValueError("empty support")
        for name, val in (("a_coefficients", a), ("b_coefficients", b),
                          ("frequencies", freqs)):
            val = val.copy()
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "support", (float(support[0]),
                                             float(support[1])))

    @property
    def n_harmonics(self):
        return self.a_coefficients.size

    @classmethod
    def zero(cls, n_harmonics, horizon, support=None, frequencies=None):
        z = np.zeros(n_harmonics)
        return cls(horizon, z, z, frequencies=frequencies, support=support)

    @classmethod
    def randomized_frequencies(cls, n_harmonics, horizon, seed,
                               support=None):
        """Harmonics perturbed by w_k -> w_k (1 + r_k), r_k ~ U[-0.5, 0.5].

        Ordering can be violated by large perturbations of neighbouring
        harmonics; redraw until the set is strictly increasing.
        """
        rng = np.random.default_rng(seed)
        k = np.arange(1, n_harmonics + 1)
        base = 2.0 * np.pi * k / horizon
        for _ in range(1000):
            freqs = base * (1.0 + rng.uniform(-0.5, 0.5, n_harmonics))
            if np.all(np.diff(freqs) > 0) and np.all(freqs > 0):
                z = np.zeros(n_harmonics)
                return cls(horizon, z, z, frequencies=freqs, support=support)
        raise RuntimeError("could not draw ordered frequencies")

    def with_coefficients(self, a, b):
        return CrabBasis(self.horizon, a, b, frequencies=self.frequencies,
                         support=self.support)

    def eval_g(self, t):
        """Modulation factor g(t); exactly 1 at and beyond the endpoints."""
        t = np.asarray(t, dtype=float)
        t_a, t_b = self.support
        span = t_b - t_a
        inside = (t > t_a) & (t < t_b)
        ts = np.where(inside, t, 0.5 * (t_a + t_b))
        series = (np.sin(np.multiply.outer(ts, self.frequencies))
                  @ self.a_coefficients
                  + np.cos(np.multiply.outer(ts, self.frequencies))
                  @ self.b_coefficients)
        inv_lambda = (ts - t_a) * (t_b - ts) / span ** 2
        g = 1.0 + inv_lambda * series
        return np.where(inside, g, 1.0) if g.ndim else \
            float(g if inside else 1.0)


def eval_g(basis, t):
    return basis.eval_g(t)


@dataclass(frozen=True)
class HarmonicGuessPulse:
    """Step-1 separation guess: optimal transport of a moving harmonic trap.

    d(t) interpolates from -x0_far to -x0_rest (both end points negative
    positions of the left well, so the values are positive separations) with
    the two sine corrections that null the final oscillation amplitude.
    """
    horizon: float     # T1, s
    x0_rest: float     # x_0 (signed position of the left well at t=T1), m
    x0_far: float      # x_0' (signed position at t=0), m
    omega_x: float     # trap frequency entering the correction amplitudes

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        T1 = self.horizon
        wt = self.omega_x * T1
        phase = 2.0 * np.pi * t / T1
        ramp = (t / T1
                + np.sin(phase) * (8.0 * np.pi / (3.0 * wt ** 2)
                                   - 2.0 / (3.0 * np.pi))
                - np.sin(2.0 * phase) * (4.0 * np.pi / (3.0 * wt ** 2)
                                         - 1.0 / (12.0 * np.pi)))
        out = (self.x0_far - self.x0_rest) * ramp - self.x0_far
        return out if out.ndim else float(out)


def guess_dho(t, horizon, x0_rest, x0_far, omega_x):
    return HarmonicGuessPulse(horizon, x0_rest, x0_far, omega_x)(t)


@dataclass(frozen=True)
class BangGuessPulse:
    """Displacement ramp 0 -> dx: accelerate / coast / decelerate.

    The coasting velocity v_m = 3 dx/(2 T1) is the maximum trap velocity;
    the parabolic caps each cover a quarter of the distance in T1/3.
    """
    horizon: float   # T1, s
    dx: float        # total displacement, m

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        T1, dx = self.horizon, self.dx
        v_m = 3.0 * dx / (2.0 * T1)
        accel = v_m ** 2 * t ** 2 / dx
        coast = v_m * t - dx / 4.0
        decel = v_m ** 2 * (T1 - t) ** 2 / (2.0 * (dx - v_m * T1)) + dx
        out = np.where(t < dx / (2.0 * v_m), accel,
                       np.where(t < dx / v_m, coast, decel))
        return out if out.ndim else float(out)


def guess_bang(t, horizon, dx):
    return BangGuessPulse(horizon, dx)(t)


@dataclass(frozen=True)
class ModulatedSeparationPulse:
    """Separation start - D(t) g(t) for the condensate step-1 transport.

    The displacement is CRAB-modulated multiplicatively; the resulting
    separation is clamped to [floor, start] (a warning is logged once per
    pulse if the clamp ever activates).
    """
    start: float                 # |x0'|, m
    displacement: BangGuessPulse
    basis: CrabBasis = None
    floor: float = 0.0
    _clamp_logged: list = field(default_factory=list, repr=False,
                                compare=False)

    def __call__(self, t):
        disp = self.displacement(np.asarray(t, dtype=float))
        if self.basis is not None:
            disp = disp * self.basis.eval_g(t)
        sep = self.start - disp
        clipped = np.clip(sep, self.floor, self.start)
        if np.any(clipped != sep) and not self._clamp_logged:
            self._clamp_logged.append(True)
            logger.warning("separation pulse clamped to [%g, %g] m",
                           self.floor, self.start)
        return clipped if clipped.ndim else float(clipped)


def _sap_dip(t, horizon, t_delay, x0, dx0, g=None):
    """cos^2 approach-and-return of the late (d_-1) pulse on (t_d, T2]."""
    span = horizon - t_delay
    phase = np.pi * (horizon - t) / span
    if g is not None:
        phase = phase * g
    return (x0 - dx0) * np.cos(phase) ** 2 + dx0


@dataclass(frozen=True)
class SapGuessPair:
    """Counterintuitive cos^2 pulse pair of the adiabatic-passage step.

    d_p1 dips from x0 to dx0 and back over [0, T2 - t_d] then rests at x0;
    d_m1 rests until t_d, then runs the mirrored dip.  By construction
    d_p1(t) = d_m1(T2 - t).
    """
    horizon: float   # T2, s
    t_delay: float   # t_d, s
    x0: float        # rest separation (positive), m
    dx0: float       # closest approach delta x_0, m

    def __post_init__(self):
        if not 0.0 < self.t_delay < 0.5 * self.horizon:
            raise ValueError("require 0 < t_d < T2/2")
        if not self.x0 > self.dx0 > 0:
            raise ValueError("require x0 > dx0 > 0")

    def d_m1(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t <= self.t_delay, self.x0,
                       _sap_dip(t, self.horizon, self.t_delay,
                                self.x0, self.dx0))
        return out if out.ndim else float(out)

    def d_p1(self, t):
        return self.d_m1(self.horizon - np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SapCrabPair(SapGuessPair):
    """SAP pair with the late pulse's cos^2 phase CRAB-modulated.

    The modulation multiplies the phase *inside* cos^2, so the pulse stays
    within [dx0, x0] for any coefficients; the basis support must be
    (t_d, T2] so continuity at t_d is preserved.
    """
    basis: CrabBasis = None

    def __post_init__(self):
        super().__post_init__()
        if self.basis is None:
            object.__setattr__(self, "basis",
                               CrabBasis.zero(1, self.horizon,
                                              support=(self.t_delay,
                                                       self.horizon)))
        ta, tb = self.basis.support
        if abs(ta - self.t_delay) > 1e-12 * self.horizon \
                or abs(tb - self.horizon) > 1e-12 * self.horizon:
            raise ValueError("basis support must be (t_d, T2]")

    def d_m1(self, t):
        t = np.asarray(t, dtype=float)
        g = self.basis.eval_g(t)
        out = np.where(t <= self.t_delay, self.x0,
                       _sap_dip(t, self.horizon, self.t_delay,
                                self.x0, self.dx0, g=g))
        return out if out.ndim else float(out)


def sap_guess_pair(t, horizon, t_delay, x0, dx0):
    pair = SapGuessPair(horizon, t_delay, x0, dx0)
    return pair.d_m1(t), pair.d_p1(t)


def sap_crab_dm1(t, horizon, t_delay, x0, dx0, basis):
    pair = SapCrabPair(horizon, t_delay, x0, dx0, basis=basis)
    return pair.d_m1(t), pair.d_p1(t)


@dataclass(frozen=True)
class ShakenPair:
    """Sinusoidal trap-position jitter: d_{-+1}(t) = d(t) +- a sin(w t).

    With this sign convention the two outer wells' absolute positions
    (-d_m1 and +d_p1) oscillate in phase for a_shake > 0.
    """
    base_m1: object      # callable t -> m
    base_p1: object
    a_shake: float       # m
    omega_shake: float   # rad/s

    def d_m1(self, t):
        t = np.asarray(t, dtype=float)
        out = self.base_m1(t) + self.a_shake * np.sin(self.omega_shake * t)
        return out if out.ndim else float(out)

    def d_p1(self, t):
        t = np.asarray(t, dtype=float)
        out = self.base_p1(t) - self.a_shake * np.sin(self.omega_shake * t)
        return out if out.ndim else float(out)


def apply_shake(pulse, a_shake, omega_shake):
    """Shake a single pulse (used for both traps) or a (d_m1, d_p1) pair."""
    if hasattr(pulse, "d_m1"):
        return ShakenPair(pulse.d_m1, pulse.d_p1, a_shake, omega_shake)
    return ShakenPair(pulse, pulse, a_shake, omega_shake)
