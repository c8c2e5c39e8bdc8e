"""sapopt: spatial adiabatic passage transport in triple-well microtraps.

Split-operator propagation of single atoms and quasi-1D condensates
through a time-dependent triple-Gaussian-well potential, with CRAB pulse
shaping driven by Nelder-Mead direct search, plus the batch harness that
turns scenario presets into CSV tables.
"""
__version__ = "0.1.0"

from .core import (RB85, RB87, SPECIES, Grid1D, Grid2D, Species, UnitSystem,
                   WaveFunction, gaussian_state, inner_product, normalize,
                   reflect)
from .potential import (CriticalPoints, SapGeometry, TrapLayout,
                        adiabatic_delay_bound, calibrate_depths,
                        find_critical_points, potential_1d, potential_2d,
                        rabi_frequency)
from .pulses import (BangGuessPulse, CrabBasis, HarmonicGuessPulse,
                     SapCrabPair, SapGuessPair, apply_shake)
from .dynamics import (EigenResult, PropagatorConfig, Trajectory,
                       imaginary_time_ground_state, split_step_propagate,
                       stationary_eigenstates, well_ground_state)
from .gpe import (GpeParams, critical_atom_number, g1d_coupling,
                  gaussian_ansatz_energy, gp_energy,
                  prepare_bec_initial_and_goal, thomas_fermi_mu)
from .objectives import (DarkStateDiagnostics, ObjectiveWeights,
                         dark_state_cost, detuning_estimate,
                         middle_occupancy, overlap_infidelity,
                         terminal_cost)
from .optimizer import (OptimizationProblem, OptimizationReport,
                        SearchOptions, crab_optimize, nelder_mead, sweep)

__all__ = [name for name in dir() if not name.startswith("_")]
