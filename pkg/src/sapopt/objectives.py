"""Cost functionals and physical diagnostics evaluated on trajectories.

Two optimization targets are supported:

* the dark-state functional, which rewards tracking the instantaneous
  first excited state (the spatial dark state), penalizes the resonance
  defect |E2 + E0 - 2 E1| and the dark-state density at the middle-well
  minimum, and rewards the terminal overlap;
* the terminal functional w_I * infidelity + w_P * (time-averaged
  middle-well occupancy), which needs no diagonalization.

The energy defect is expressed in units of hbar*omega_x and the node
density is scaled by l_x so both integrand terms are dimensionless.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .constants import HBAR
from .core import inner_product
from .dynamics import stationary_eigenstates
from .errors import GeometryError, ObjectiveError
from .potential import find_critical_points, potential_1d

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ObjectiveWeights:
    """Weights of the cost functionals; all >= 0, at least one positive."""
    w_energy: float = 0.0      # w_E, dark-state functional
    w_dark: float = 0.0        # w_d
    w_goal: float = 0.0        # w_g
    w_infidelity: float = 0.0  # w_I, terminal functional
    w_occupancy: float = 0.0   # w_P

    def __post_init__(self):
        vals = (self.w_energy, self.w_dark, self.w_goal,
                self.w_infidelity, self.w_occupancy)
        if any(v < 0 for v in vals) or not any(v > 0 for v in vals):
            raise ValueError("weights must be >= 0 with at least one > 0")


@dataclass(frozen=True)
class DarkStateDiagnostics:
    """Time-averaged dark-state projection and node density (p_d, n_d)."""
    dark_projection: float   # p_d in [0, 1]
    node_density: float      # n_d >= 0, in units 1/l_x scaled dimensionless


def overlap_infidelity(psi, psi_goal):
    """1 - |<psi_goal|psi>|^2, in [0, 1]; grids must match."""
    val = 1.0 - abs(inner_product(psi_goal, psi)) ** 2
    return min(max(val, 0.0), 1.0)


def _window_probability(density, x, a, b):
    """integral of density over [a, b] by trapezoid with interpolated edges."""
    nodes = np.concatenate(([a], x[(x > a) & (x < b)], [b]))
    vals = np.interp(nodes, x, density)
    return float(np.trapezoid(vals, nodes))


def middle_occupancy(traj, n_scan=1024):
    """Per-sample and time-averaged probability in the middle well.

    P_c(t) integrates |psi|^2 between the two interior potential maxima of
    the instantaneous trap; samples whose well structure cannot be
    resolved are flagged (NaN in the series) and excluded from the
    average.  Returns (series, average); the flag count is cached in
    ``traj.diagnostics['occupancy_flagged']``.
    """
    if traj.layout is None:
        raise ObjectiveError("trajectory carries no trap schedule")
    if "occupancy_series" in traj.diagnostics:
        return (traj.diagnostics["occupancy_series"],
                traj.diagnostics["occupancy_average"])
    c = traj.controls
    series = np.full(len(traj.times), np.nan)
    flagged = 0
    for i, psi in enumerate(traj.states):
        try:
            pts = find_critical_points(
                traj.layout, float(c["d_m1"][i]), float(c["d_p1"][i]),
                float(c["v_m1"][i]), float(c["v_p1"][i]), n_scan=n_scan)
        except GeometryError:
            flagged += 1
            continue
        series[i] = _window_probability(psi.density(), traj.grid.x,
                                        pts.x_left_max, pts.x_right_max)
    if flagged:
        logger.warning("occupancy: %d of %d samples had unresolved wells",
                       flagged, len(traj.times))
    average = float(np.nanmean(series))
    traj.diagnostics["occupancy_series"] = series
    traj.diagnostics["occupancy_average"] = average
    traj.diagnostics["occupancy_flagged"] = flagged
    return series, average


def spectral_diagnostics(traj, omega_x):
    """Per-sample eigen-triplet data for the dark-state functional.

    Fills (and caches) arrays: energies (n_samples, 3), dark_projection
    |<psi_d|psi>|^2, node_density |psi_d(x_C)|^2 and the energy defect
    |E2 + E0 - 2 E1| / (hbar omega_x).  Eigenvector signs follow the
    previous sample to avoid projection flicker.
    """
    if "energies" in traj.diagnostics:
        return traj.diagnostics
    if traj.layout is None:
        raise ObjectiveError("trajectory carries no trap schedule")
    c = traj.controls
    n = len(traj.times)
    energies = np.empty((n, 3))
    proj = np.empty(n)
    node = np.empty(n)
    prev = None
    for i, psi in enumerate(traj.states):
        v = potential_1d(traj.grid.x, traj.layout,
                         float(c["d_m1"][i]), float(c["d_p1"][i]),
                         float(c["v_m1"][i]), float(c["v_p1"][i]))
        try:
            eig = stationary_eigenstates(v, traj.grid, traj.mass,
                                         previous=prev)
            pts = find_critical_points(
                traj.layout, float(c["d_m1"][i]), float(c["d_p1"][i]),
                float(c["v_m1"][i]), float(c["v_p1"][i]))
        except GeometryError as exc:
            raise ObjectiveError(
                f"eigen-diagnostics failed at sample {i}: {exc}") from exc
        prev = eig
        energies[i] = eig.energies
        dark = eig.dark_state
        proj[i] = abs(inner_product(dark, psi)) ** 2
        node[i] = float(np.interp(pts.x_center, traj.grid.x,
                                  np.abs(dark.amplitudes) ** 2))
    traj.diagnostics["energies"] = energies
    traj.diagnostics["dark_projection"] = proj
    traj.diagnostics["node_density"] = node
    traj.diagnostics["energy_defect"] = (
        np.abs(energies[:, 2] + energies[:, 0] - 2.0 * energies[:, 1])
        / (HBAR * omega_x))
    return traj.diagnostics


def _windowed_average(times, values, t_lo, t_hi):
    """Trapezoid average of sampled values over [t_lo, t_hi]."""
    inside = (times > t_lo) & (times < t_hi)
    nodes = np.concatenate(([t_lo], times[inside], [t_hi]))
    vals = np.concatenate(([np.interp(t_lo, times, values)],
                           values[inside],
                           [np.interp(t_hi, times, values)]))
    return float(np.trapezoid(vals, nodes) / (t_hi - t_lo))


def dark_state_diagnostics(traj, omega_x, ell_x, t_delay):
    """The (p_d, n_d) pair: windowed dark projection, scaled node density."""
    d = spectral_diagnostics(traj, omega_x)
    horizon = float(traj.times[-1])
    p_d = _windowed_average(traj.times, d["dark_projection"],
                            t_delay, horizon - t_delay)
    n_d = float(np.trapezoid(ell_x * d["node_density"], traj.times)
                / horizon)
    return DarkStateDiagnostics(dark_projection=p_d, node_density=n_d)


def dark_state_cost(traj, weights, psi_goal, omega_x, ell_x, t_delay):
    """Dark-state objective functional.

    J = 1 + (w_E/T2) int [dE(t) + l_x |psi_d(x_C,t)|^2] dt
          - (w_d/(T2-2t_d)) int_{t_d}^{T2-t_d} |<psi_d|psi>|^2 dt
          - w_g |<psi_g|psi(T2)>|^2,

    dE = |E2+E0-2E1|/(hbar omega_x); trapezoid rule on the sample times.
    """
    d = spectral_diagnostics(traj, omega_x)
    horizon = float(traj.times[-1])
    drive = float(np.trapezoid(d["energy_defect"]
                               + ell_x * d["node_density"], traj.times))
    p_d = _windowed_average(traj.times, d["dark_projection"],
                            t_delay, horizon - t_delay)
    goal_overlap = abs(inner_product(psi_goal, traj.final_state)) ** 2
    return (1.0 + weights.w_energy / horizon * drive
            - weights.w_dark * p_d - weights.w_goal * goal_overlap)


def terminal_cost(traj, weights, psi_goal):
    """w_I * (1 - |<psi_g|psi(T2)>|^2) + w_P * P_c (time-averaged)."""
    cost = weights.w_infidelity * overlap_infidelity(traj.final_state,
                                                     psi_goal)
    if weights.w_occupancy > 0.0:
        _, p_c = middle_occupancy(traj)
        cost += weights.w_occupancy * p_c
    return cost


def detuning_estimate(layout, d_m1, d_p1, params, mass,
                      v_m1=1.0, v_p1=1.0, shares=None):
    """Onsite-energy spread of the three wells, J, plus feasibility data.

    The onsite energy of well k is V_min,k + hbar*omega_k + mu_k, with
    omega_k the local curvature frequency and mu_k the chemical potential
    of the well's atom share in the local harmonic approximation.  Returns
    (delta, ratio) where ratio = (g1D N / l_x)/delta is the degree by which
    the interaction exceeds the resonance window (SAP in the nonlinear
    regime needs ratio < 1).
    """
    import math

    from .core import Grid1D, gaussian_state
    from .dynamics import PropagatorConfig, imaginary_time_ground_state
    from .potential import potential_1d_second_derivative

    pts = find_critical_points(layout, d_m1, d_p1, v_m1, v_p1)
    if shares is None:
        shares = (params.atom_number / 3.0,) * 3
    onsite = []
    for x_min, share in zip(pts.minima, shares):
        curv = float(potential_1d_second_derivative(
            x_min, layout, d_m1, d_p1, v_m1, v_p1))
        if curv <= 0:
            raise GeometryError("non-convex well minimum")
        omega_k = math.sqrt(curv / mass)
        v_min = float(potential_1d(x_min, layout, d_m1, d_p1, v_m1, v_p1))
        ell_k = math.sqrt(HBAR / (mass * omega_k))
        grid = Grid1D(-12.0 * ell_k, 12.0 * ell_k, 256)
        v_local = 0.5 * mass * omega_k ** 2 * grid.x ** 2
        trial = gaussian_state(grid, 0.0, ell_k)
        cfg = PropagatorConfig(dt=2.0 * math.pi / (omega_k * 200.0),
                               mode="gpe_1d",
                               nonlinearity=params.g1d * share,
                               time_direction="imaginary")
        _, mu_k = imaginary_time_ground_state(v_local, cfg, trial, mass,
                                              ref_energy=HBAR * omega_k)
        onsite.append(v_min + HBAR * omega_k + mu_k)
    delta = max(onsite) - min(onsite)
    omega_x = layout.omega_x(mass)
    ell_x = math.sqrt(HBAR / (mass * omega_x))
    interaction = params.nonlinearity / ell_x
    ratio = interaction / delta if delta > 0 else float("inf")
    return delta, ratio
