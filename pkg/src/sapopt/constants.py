"""Physical constants and atomic species data.

Values are CODATA 2018 / 2019 SI redefinition; scattering lengths are the
standard literature values for the hyperfine states relevant to microtrap
experiments (85Rb in |F=2,mF=-2> collides on the triplet potential, hence
the negative triplet scattering length).
"""
import numpy as np

HBAR = 1.054571817e-34      # J*s        reduced Planck constant (CODATA 2018)
KB = 1.380649e-23           # J/K        Boltzmann constant (exact, SI 2019)
AMU = 1.66053906660e-27     # kg         unified atomic mass unit (CODATA 2018)
BOHR_RADIUS = 5.29177210903e-11  # m     Bohr radius (CODATA 2018)

#: provenance table echoed into run metadata: name -> (value, unit, source)
CONSTANTS_TABLE = {
    "hbar": (HBAR, "J*s", "CODATA 2018"),
    "k_B": (KB, "J/K", "SI 2019 exact"),
    "u": (AMU, "kg", "CODATA 2018"),
    "a_0": (BOHR_RADIUS, "m", "CODATA 2018"),
    "Rb85_mass": (84.911789738 * AMU, "kg", "AME2020, 84.911789738 u"),
    "Rb87_mass": (86.909180527 * AMU, "kg", "AME2020, 86.909180527 u"),
    "Rb85_a3d": (-369.0 * BOHR_RADIUS, "m",
                 "triplet a_t = -369 a0, Roberts et al. PRL 81, 5109 (1998)"),
    "Rb87_a3d": (100.4 * BOHR_RADIUS, "m",
                 "a = 100.4 a0, van Kempen et al. PRL 88, 093201 (2002)"),
}


def constant(name):
    return CONSTANTS_TABLE[name][0]
