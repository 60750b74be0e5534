"""Unit constants and conversions. Single source of truth for the whole package.

Everything internal is in Hartree atomic units; these helpers convert to and
from the lab units used in input files (eV, W/cm^2, femtoseconds).
"""

HARTREE_EV = 27.211386245988
"""One hartree in electron volts."""

INTENSITY_AU = 3.50944758e16
"""Intensity (W/cm^2) at which the peak field amplitude equals 1 a.u."""

AU_TIME_AS = 24.18884
"""One atomic unit of time in attoseconds."""

AU_TIME_FS = AU_TIME_AS * 1e-3


def ev_to_au(energy_ev: float) -> float:
    return energy_ev / HARTREE_EV


def au_to_ev(energy_au: float) -> float:
    return energy_au * HARTREE_EV


def fs_to_au(t_fs: float) -> float:
    return t_fs / AU_TIME_FS


def au_to_fs(t_au: float) -> float:
    return t_au * AU_TIME_FS
