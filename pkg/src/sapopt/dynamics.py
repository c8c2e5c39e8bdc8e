"""Time propagation, stationary states and spectral analysis.

Real- and imaginary-time evolution of the Schroedinger and (cubic)
Gross-Pitaevskii equations by second-order Strang splitting,

    exp(-i V dt/2) . exp(-i K dt) . exp(-i V dt/2),

with the kinetic factor applied in the spectral (momentum) representation
and the potential sampled at the midpoint of each step.  In GPE mode the
mean-field term g1D*N*|psi|^2 is recomputed from the instantaneous density
in each potential half step (its per-step drift is O(dt), so no
predictor-corrector is needed at second order).

The triple-well fast path hands the whole loop to the selected stepping
backend (compiled kernel when available); generic callable potentials and
the 2D tensor grid run a vectorized numpy loop.

Norm is conserved to rounding in real time; imaginary time renormalizes
every step and converges monotonically to the (nonlinear) ground state.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR
from .core import Grid1D, Grid2D, WaveFunction, normalize
from .errors import (BoundaryLeakError, CollapseError, ConvergenceError,
                     SapoptError)
from .kernel import get_backend
from .potential import TrapLayout, potential_2d

EDGE_CELLS = 2           # cells per side counted as "boundary" for leak checks
BOUNDARY_LEAK_TOL = 1e-6


@dataclass(frozen=True)
class PropagatorConfig:
    """Discretization and model choices of one propagation."""
    dt: float                      # target time step, s (actual dt <= this)
    mode: str = "schrodinger_1d"   # schrodinger_1d | schrodinger_2d | gpe_1d
    nonlinearity: float = 0.0      # g1D * N, J*m (gpe_1d only)
    time_direction: str = "real"   # real | imaginary
    sample_stride: int = None      # steps between stored samples
    n_samples: int = 200           # used when sample_stride is None
    backend: str = "auto"          # stepping backend for the 1D fast path
    boundary_leak_tol: float = BOUNDARY_LEAK_TOL

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.mode not in ("schrodinger_1d", "schrodinger_2d", "gpe_1d"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.nonlinearity != 0.0 and self.mode != "gpe_1d":
            raise ValueError("nonlinearity requires gpe_1d mode")
        if self.time_direction not in ("real", "imaginary"):
            raise ValueError("time_direction must be real or imaginary")


@dataclass
class Trajectory:
    """Time-sampled record of one real-time propagation."""
    grid: object
    times: np.ndarray              # sample times, s
    states: list                   # WaveFunction per sample
    controls: dict                 # per-sample d_m1/d_p1/v_m1/v_p1 (or {})
    norms: np.ndarray              # quadrature norm per sample
    layout: TrapLayout = None      # schedule that generated the run
    dt: float = 0.0                # actual step used
    n_steps: int = 0
    mass: float = 0.0
    nonlinearity: float = 0.0
    diagnostics: dict = field(default_factory=dict)  # write-once cache

    @property
    def final_state(self):
        return self.states[-1]


def _step_plan(T, dt_target, stride, n_samples):
    """Integer step count divisible into the requested samples."""
    raw = max(1, math.ceil(T / dt_target))
    if stride is None:
        intervals = max(1, n_samples - 1)
        stride = max(1, math.ceil(raw / intervals))
        n_steps = stride * intervals
    else:
        n_steps = stride * max(1, math.ceil(raw / stride))
    return n_steps, stride, T / n_steps


def _check_edges(edge, times, tol=BOUNDARY_LEAK_TOL):
    worst = int(np.argmax(edge))
    if edge[worst] > tol:
        raise BoundaryLeakError(
            f"probability {edge[worst]:.3e} at the grid edge at "
            f"t={times[worst]:.3e} s; enlarge the grid")


def split_step_propagate(psi0, potential, config, T, mass,
                         record_states=True):
    """Real-time propagation of ``psi0`` under ``potential`` for time T.

    ``potential`` is either a TrapLayout with pulses attached (fast path,
    1D and 2D) or any callable V(x_grid, t) -> J evaluated on the grid
    (generic path, 1D only).  Returns a Trajectory with ~config.n_samples
    uniformly spaced samples including both endpoints.
    """
    if config.time_direction != "real":
        raise ValueError("use imaginary_time_ground_state for imaginary time")
    if T <= 0:
        raise ValueError("T must be positive")
    dt_target = config.dt
    if config.nonlinearity != 0.0:
        # split-step GPE is parametrically unstable when the kinetic phase
        # at the grid's band edge wraps past ~pi (the mean-field term then
        # pumps spurious resonances); cap dt so the band-edge phase <= pi/2
        grid_1d = psi0.grid if isinstance(psi0.grid, Grid1D) \
            else psi0.grid.x_axis
        k_max = math.pi / grid_1d.dx
        dt_target = min(dt_target, math.pi * mass / (HBAR * k_max ** 2))
    n_steps, stride, dt = _step_plan(T, dt_target, config.sample_stride,
                                     config.n_samples)
    if config.mode == "schrodinger_2d":
        return _propagate_2d(psi0, potential, config, T, mass,
                             n_steps, stride, dt, record_states)

    grid = psi0.grid
    if not isinstance(grid, Grid1D):
        raise ValueError("1D modes require a Grid1D state")
    t_mid = (np.arange(n_steps) + 0.5) * dt
    t_samples = np.arange(n_steps // stride + 1) * (stride * dt)

    kin_phase = np.exp(-1j * HBAR * grid.k ** 2 * dt / (2.0 * mass))
    n_out = n_steps // stride + 1
    out_states = np.empty((n_out, grid.n_points), dtype=np.complex128)
    out_edge = np.empty(n_out)

    controls = {}
    if isinstance(potential, TrapLayout):
        d_m1, d_p1, v_m1, v_p1 = (np.ascontiguousarray(c, dtype=float)
                                  for c in potential.controls_at(t_mid))
        backend = get_backend(config.backend)
        gauss_center = np.exp(-grid.x ** 2 / (2.0 * potential.waist ** 2))
        backend.run_triple_well_real_time(
            psi0.amplitudes, gauss_center, grid.x, kin_phase,
            1.0 / (2.0 * potential.waist ** 2),
            potential.depth * dt / (2.0 * HBAR),
            config.nonlinearity * dt / (2.0 * HBAR),
            d_m1, d_p1, v_m1, v_p1, stride, grid.dx, EDGE_CELLS,
            out_states, out_edge)
        cs = potential.controls_at(t_samples)
        controls = dict(zip(("d_m1", "d_p1", "v_m1", "v_p1"), cs))
        layout = potential
    else:
        _run_generic_1d(psi0.amplitudes, potential, grid, kin_phase,
                        config.nonlinearity, dt, t_mid, stride,
                        out_states, out_edge)
        layout = None

    _check_edges(out_edge, t_samples, config.boundary_leak_tol)
    norms = np.sqrt(np.sum(np.abs(out_states) ** 2, axis=1) * grid.dx)
    states = [WaveFunction(grid, out_states[i]) for i in range(n_out)] \
        if record_states else [WaveFunction(grid, out_states[0]),
                               WaveFunction(grid, out_states[-1])]
    times = t_samples if record_states else t_samples[[0, -1]]
    if not record_states:
        norms = norms[[0, -1]]
        controls = {k: np.asarray(v)[[0, -1]] for k, v in controls.items()}
    return Trajectory(grid=grid, times=times, states=states,
                      controls=controls, norms=norms, layout=layout,
                      dt=dt, n_steps=n_steps, mass=mass,
                      nonlinearity=config.nonlinearity)


def _run_generic_1d(amp0, potential_fn, grid, kin_phase, g_n, dt, t_mid,
                    stride, out_states, out_edge):
    psi = amp0.astype(np.complex128, copy=True)
    dens_edge = lambda p: (np.abs(p[:EDGE_CELLS]) ** 2).sum() * grid.dx \
        + (np.abs(p[-EDGE_CELLS:]) ** 2).sum() * grid.dx  # noqa: E731
    out_states[0] = psi
    out_edge[0] = dens_edge(psi)
    for j, tm in enumerate(t_mid):
        v = np.asarray(potential_fn(grid.x, tm), dtype=float)
        phase = v * dt / (2.0 * HBAR)
        if g_n != 0.0:
            psi *= np.exp(-1j * (phase
                                 + g_n * dt / (2 * HBAR) * np.abs(psi) ** 2))
        else:
            psi *= np.exp(-1j * phase)
        psi = np.fft.ifft(kin_phase * np.fft.fft(psi))
        if g_n != 0.0:
            psi *= np.exp(-1j * (phase
                                 + g_n * dt / (2 * HBAR) * np.abs(psi) ** 2))
        else:
            psi *= np.exp(-1j * phase)
        if (j + 1) % stride == 0:
            s = (j + 1) // stride
            out_states[s] = psi
            out_edge[s] = dens_edge(psi)


def _propagate_2d(psi0, layout, config, T, mass, n_steps, stride, dt,
                  record_states):
    """2D Schroedinger propagation on the (x, z) tensor grid.

    The triple-Gaussian 2D potential factorizes into an outer product
    S(x,t) * exp(-z^2/2wz^2), which keeps the per-step potential build
    linear in the grid size.
    """
    grid = psi0.grid
    if not isinstance(grid, Grid2D):
        raise ValueError("schrodinger_2d requires a Grid2D state")
    if not isinstance(layout, TrapLayout) or layout.axial_waist is None:
        raise ValueError("2D propagation requires a TrapLayout with "
                         "axial_waist")
    gx, gz = grid.x_axis, grid.z_axis
    kx2 = gx.k ** 2
    kz2 = gz.k ** 2
    kin_phase = np.exp(-1j * HBAR * dt / (2.0 * mass)
                       * (kx2[:, None] + kz2[None, :]))
    env_z = np.exp(-gz.x ** 2 / (2.0 * layout.axial_waist ** 2))
    inv = 1.0 / (2.0 * layout.waist ** 2)
    c_v = layout.depth * dt / (2.0 * HBAR)
    t_mid = (np.arange(n_steps) + 0.5) * dt
    d_m1, d_p1, v_m1, v_p1 = layout.controls_at(t_mid)

    psi = psi0.amplitudes.astype(np.complex128, copy=True)
    # store only endpoints by default: 2D sample storage is large
    keep = list(range(0, n_steps // stride + 1)) if record_states \
        else [0, n_steps // stride]
    states, times, norms, edges = [], [], [], []

    def record(s, p):
        if s in keep:
            states.append(WaveFunction(grid, p))
            times.append(s * stride * dt)
            norms.append(float(np.sqrt(np.sum(np.abs(p) ** 2)
                                       * grid.cell_volume)))
        dens = np.abs(p) ** 2
        e = (dens[:EDGE_CELLS, :].sum() + dens[-EDGE_CELLS:, :].sum()
             + dens[:, :EDGE_CELLS].sum() + dens[:, -EDGE_CELLS:].sum()) \
            * grid.cell_volume
        edges.append(e)

    record(0, psi)
    xg = gx.x
    for j in range(n_steps):
        s_x = (v_m1[j] * np.exp(-(xg + d_m1[j]) ** 2 * inv)
               + np.exp(-xg ** 2 * inv)
               + v_p1[j] * np.exp(-(xg - d_p1[j]) ** 2 * inv))
        phase = c_v * (1.0 - np.outer(s_x, env_z))
        psi *= np.exp(-1j * phase)
        psi = np.fft.ifft2(kin_phase * np.fft.fft2(psi))
        psi *= np.exp(-1j * phase)
        if (j + 1) % stride == 0:
            record((j + 1) // stride, psi)

    _check_edges(np.array(edges),
                 np.arange(len(edges)) * stride * dt,
                 config.boundary_leak_tol)
    return Trajectory(grid=grid, times=np.array(times), states=states,
                      controls={}, norms=np.array(norms), layout=layout,
                      dt=dt, n_steps=n_steps, mass=mass)


def kinetic_energy(psi, mass):
    """<K> evaluated spectrally, J."""
    grid = psi.grid
    if isinstance(grid, Grid1D):
        psi_k = np.fft.fft(psi.amplitudes)
        w = HBAR ** 2 * grid.k ** 2 / (2.0 * mass)
        return float(np.sum(w * np.abs(psi_k) ** 2) * grid.dx
                     / grid.n_points)
    psi_k = np.fft.fft2(psi.amplitudes)
    w = (HBAR ** 2 / (2.0 * mass)
         * (grid.x_axis.k[:, None] ** 2 + grid.z_axis.k[None, :] ** 2))
    n_tot = grid.x_axis.n_points * grid.z_axis.n_points
    return float(np.sum(w * np.abs(psi_k) ** 2) * grid.cell_volume / n_tot)


def total_energy(psi, v_grid, mass, nonlinearity=0.0):
    """Energy functional <K> + <V> + (g1D N/2) int |psi|^4, J (per atom)."""
    dens = psi.density()
    cell = psi.grid.cell_volume
    e_pot = float(np.sum(v_grid * dens) * cell)
    e_int = 0.5 * nonlinearity * float(np.sum(dens ** 2) * cell)
    return kinetic_energy(psi, mass) + e_pot + e_int


def chemical_potential(psi, v_grid, mass, nonlinearity=0.0):
    """GPE chemical potential <K> + <V> + g1D N int |psi|^4, J."""
    dens = psi.density()
    cell = psi.grid.cell_volume
    e_pot = float(np.sum(v_grid * dens) * cell)
    e_int = nonlinearity * float(np.sum(dens ** 2) * cell)
    return kinetic_energy(psi, mass) + e_pot + e_int


def imaginary_time_ground_state(potential, config, trial, mass,
                                ref_energy=None, max_steps=400000,
                                energy_tol_factor=1e-12,
                                level_refinements=4, level_tol_rel=1e-8,
                                energy_trace=None):
    """Ground state by imaginary-time propagation with renormalization.

    ``potential`` is a static grid array (J), or a callable evaluated at
    t=0 on the trial's grid.  Each sweep terminates when the per-step
    change of the energy functional drops below
    ``energy_tol_factor * ref_energy`` (held for 5 consecutive steps).

    The fixed point of the discrete split map is biased by O((E dt/hbar)^n)
    terms, which matters for stiff problems (chemical potential >> hbar
    omega_ref); converged sweeps are therefore repeated with dt/4, warm
    started, until the converged energy moves by less than
    ``level_tol_rel * |E|`` between refinement levels (at most
    ``level_refinements`` extra sweeps).

    Returns ``(state, E)`` for Schroedinger mode or ``(state, mu)`` for
    GPE mode.
    """
    grid = trial.grid
    if callable(potential):
        if isinstance(grid, Grid1D):
            v = np.asarray(potential(grid.x, 0.0), dtype=float)
        else:
            v = np.asarray(potential(grid.x_axis.x[:, None],
                                     grid.z_axis.x[None, :]), dtype=float)
    else:
        v = np.asarray(potential, dtype=float)
    g_n = config.nonlinearity
    if ref_energy is None:
        ref_energy = max(abs(v).max(), 1e-30)

    if isinstance(grid, Grid1D):
        k2 = grid.k ** 2
        fft, ifft = np.fft.fft, np.fft.ifft
    else:
        k2 = grid.x_axis.k[:, None] ** 2 + grid.z_axis.k[None, :] ** 2
        fft, ifft = np.fft.fft2, np.fft.ifft2

    cell = grid.cell_volume
    amp = normalize(trial).amplitudes.copy()
    state = None
    e_level = None
    budget = [max_steps]

    def sweep(amp, dt):
        nonlocal state
        kin_decay = np.exp(-HBAR * k2 * dt / (2.0 * mass))
        e_prev = np.inf
        settled = 0
        width_prev = np.inf
        shrink_run = 0
        step = 0
        while budget[0] > 0:
            budget[0] -= 1
            step += 1
            amp = amp * np.exp(-(v + g_n * np.abs(amp) ** 2)
                               * dt / (2.0 * HBAR))
            amp = ifft(kin_decay * fft(amp))
            amp = amp * np.exp(-(v + g_n * np.abs(amp) ** 2)
                               * dt / (2.0 * HBAR))
            amp = amp / np.sqrt(np.sum(np.abs(amp) ** 2) * cell)
            state = WaveFunction(grid, amp)
            e_now = total_energy(state, v, mass, g_n)
            if not np.isfinite(e_now):
                if g_n < 0.0:
                    raise CollapseError(
                        "imaginary-time flow overflowed: attractive "
                        "interaction has no stable ground state here")
                raise ConvergenceError(
                    "imaginary-time flow overflowed; reduce dt")
            if energy_trace is not None:
                energy_trace.append(e_now)
            settled = settled + 1 \
                if abs(e_now - e_prev) < energy_tol_factor * ref_energy \
                else 0
            if settled >= 5:
                return amp, e_now
            e_prev = e_now
            if g_n < 0.0 and isinstance(grid, Grid1D) and step % 10 == 0:
                dens = np.abs(amp) ** 2
                mean = float(np.sum(grid.x * dens) * cell)
                width = math.sqrt(max(
                    float(np.sum((grid.x - mean) ** 2 * dens) * cell), 0.0))
                shrink_run = shrink_run + 1 if width < 2.0 * grid.dx else 0
                width_prev = width
                diving = e_now < -100.0 * (ref_energy + abs(v).max())
                if shrink_run >= 2 or (diving and width < 4.0 * grid.dx):
                    raise CollapseError(
                        f"attractive condensate width {width:.3e} m below "
                        "grid resolution; no stable ground state")
        raise ConvergenceError(
            f"imaginary time did not converge in {max_steps} steps")

    dt = config.dt
    amp, e_level = sweep(amp, dt)
    for _ in range(level_refinements):
        dt /= 4.0
        amp, e_next = sweep(amp, dt)
        moved = abs(e_next - e_level)
        e_level = e_next
        if moved < max(level_tol_rel * abs(e_level),
                       10.0 * energy_tol_factor * ref_energy):
            break
    mu_or_e = chemical_potential(state, v, mass, g_n) if g_n != 0.0 \
        else e_level
    return state, mu_or_e


def isolated_well_state(layout, center, grid, mass, depth_factor=1.0):
    """Ground state of one lone Gaussian well at ``center`` (neighbours
    removed), via imaginary time from the harmonic-width Gaussian."""
    from .core import gaussian_state

    omega = layout.omega_x(mass)
    ell = math.sqrt(HBAR / (mass * omega))
    v = layout.depth * (1.0 - depth_factor
                        * np.exp(-(grid.x - center) ** 2
                                 / (2.0 * layout.waist ** 2)))
    trial = gaussian_state(grid, center, ell)
    cfg = PropagatorConfig(dt=2.0 * math.pi / (omega * 200.0),
                           time_direction="imaginary")
    return imaginary_time_ground_state(v, cfg, trial, mass,
                                       ref_energy=HBAR * omega)


def well_ground_state(layout, d_m1, d_p1, grid, mass, well="left",
                      v_m1=1.0, v_p1=1.0, manifold=3):
    """Localized ground state of one well of the static triple well.

    The wells of interest exchange probability by tunneling (the lowest
    triplet is quasi-degenerate, not exactly so), hence a localized well
    state is not an eigenstate and naive imaginary time slowly drifts into
    the delocalized parity eigenstate.  The physical local mode is the
    projection of the isolated-well ground state onto the lowest
    ``manifold`` eigenstates of the full potential.

    Returns (state, <H> of the state in the full potential).
    """
    from .potential import potential_1d

    center = {"left": -d_m1, "center": 0.0, "right": d_p1}[well]
    vk = {"left": v_m1, "center": 1.0, "right": v_p1}[well]
    seed, _ = isolated_well_state(layout, center, grid, mass,
                                  depth_factor=vk)
    v_full = potential_1d(grid.x, layout, d_m1, d_p1, v_m1, v_p1)
    eig = stationary_eigenstates(v_full, grid, mass, count=manifold)
    amp = np.zeros(grid.n_points, dtype=np.complex128)
    for phi in eig.states:
        c = np.sum(np.conj(phi.amplitudes) * seed.amplitudes) * grid.dx
        amp += c * phi.amplitudes
    state = normalize(WaveFunction(grid, amp))
    energy = total_energy(state, v_full, mass)
    return state, energy


@dataclass(frozen=True)
class EigenResult:
    """Lowest eigenpairs of the instantaneous 1D Hamiltonian."""
    energies: np.ndarray       # ascending, J
    states: tuple              # WaveFunction per level

    @property
    def dark_state(self):
        """Spatial dark state = first excited level of the triple well."""
        return self.states[1]

    def level_imbalance(self):
        """|E2 + E0 - 2 E1|, the resonance-defect scale of the triplet, J."""
        e = self.energies
        return float(abs(e[2] + e[0] - 2.0 * e[1]))


def stationary_eigenstates(v_grid, grid, mass, count=3, previous=None):
    """Lowest ``count`` eigenpairs of the tridiagonal FD Hamiltonian.

    Second-order symmetric finite differences; LAPACK bisection plus
    inverse iteration on the tridiagonal matrix (scipy's
    ``eigh_tridiagonal`` with an index range).  Eigenvector signs are fixed
    against ``previous`` (an EigenResult) so scanning a schedule never
    flips phases between neighbouring samples.
    """
    from scipy.linalg import eigh_tridiagonal

    v = np.asarray(v_grid, dtype=float)
    if v.shape != (grid.n_points,):
        raise SapoptError("potential array does not match the grid")
    t = HBAR ** 2 / (2.0 * mass * grid.dx ** 2)
    diag = 2.0 * t + v
    off = np.full(grid.n_points - 1, -t)
    vals, vecs = eigh_tridiagonal(diag, off, select="i",
                                  select_range=(0, count - 1))
    vecs = vecs / math.sqrt(grid.dx)   # l2 -> quadrature normalization
    states = []
    for i in range(count):
        amp = vecs[:, i].astype(np.complex128)
        if previous is not None:
            ref = previous.states[i].amplitudes
            if float(np.real(np.sum(np.conj(ref) * amp))) < 0.0:
                amp = -amp
        elif amp[np.argmax(np.abs(amp))].real < 0.0:
            amp = -amp
        states.append(WaveFunction(grid, amp))
    return EigenResult(energies=vals.astype(float), states=tuple(states))
