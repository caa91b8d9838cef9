"""Unit conventions.

Energies and rates are wavenumbers (cm^-1) with hbar = 1, so an energy ``E``
acts as the angular frequency ``2 pi c E``.  Internal times are therefore in
(cm^-1)^-1 = 1/(2 pi c) and converted to femtoseconds only at I/O boundaries.
"""

import math

#: speed of light in cm/fs
SPEED_OF_LIGHT_CM_PER_FS = 2.99792458e-5

#: femtoseconds per internal time unit, 1/(2 pi c)
FS_PER_INTERNAL = 1.0 / (2.0 * math.pi * SPEED_OF_LIGHT_CM_PER_FS)

#: Boltzmann constant in cm^-1 / K (CODATA 2018)
KB_CM_PER_K = 0.695034800

#: 1 cm^-1 in eV
EV_PER_CM = 1.239841984e-4


def fs_to_internal(t_fs):
    return t_fs / FS_PER_INTERNAL


def internal_to_fs(t):
    return t * FS_PER_INTERNAL


def kT(temperature):
    """Thermal energy ``k_B T`` in cm^-1."""
    return KB_CM_PER_K * temperature


def beta(temperature):
    """Inverse temperature in cm."""
    return 1.0 / kT(temperature)
