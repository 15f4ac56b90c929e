"""Microwave energy accounting: Poynting flux, sequence energies, ratios.

Fluxes and energies are reported in normalized units: the plane-wave
prefactor 2c/(mu0 gamma_e^2) is set to one, which cancels in every
ratio.  Absolute SI output is available by multiplying with
:func:`si_flux_prefactor`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .control import (AmplitudeModulatedDrive, ConstantDrive, DriveScheme,
                      PhaseModulatedDrive, constant_segments, period_segments)
from .analytic import bessel_jn, square_wave_a1
from .system import MU0, GAMMA_E

C_LIGHT = 299792458.0


def si_flux_prefactor(gamma_e: float = GAMMA_E) -> float:
    """2c / (mu0 gamma_e^2): multiply normalized fluxes by this for W/m^2."""
    return 2.0 * C_LIGHT / (MU0 * gamma_e**2)


def poynting_flux(omega: float, d_omega_dt: float, omega_carrier: float,
                  t: float, phase: float = 0.0) -> float:
    """Instantaneous normalized flux of the modulated plane wave.

    |P| = Omega^2 cos^2(w t + phi) + (Omega dOmega/dt / w) sin cos; the
    cross term carries the 1/w from k = w/c and is negligible for GHz
    carriers but retained.
    """
    if omega_carrier <= 0:
        raise ValueError("carrier frequency must be positive")
    c_t = np.cos(omega_carrier * t + phase)
    s_t = np.sin(omega_carrier * t + phase)
    return omega**2 * c_t**2 + (omega * d_omega_dt / omega_carrier) * s_t * c_t


@dataclass(frozen=True)
class EnergyReport:
    """Carrier-cycle-averaged energy figures for one drive sequence.

    All values are normalized (prefactor-free).  ``ratio_hh_to_this`` is
    filled for modulated drives: the published total-energy ratio against
    the constant drive that gathers the same signal.
    """

    peak_flux: float
    avg_flux: float
    total_energy: float
    per_cycle_energy: float | None
    ratio_hh_to_this: float | None

    def __post_init__(self):
        if min(self.peak_flux, self.avg_flux, self.total_energy) < 0:
            raise ValueError("energy figures must be nonnegative")


def _envelope_segments(drive: DriveScheme, t_f: float):
    """(durations, envelope amplitudes Omega) covering one modulation period,
    or the full horizon for constant drives."""
    if isinstance(drive, ConstantDrive):
        segs = constant_segments(drive, t_f)
    else:
        segs = period_segments(drive)
    durs = np.array([s.duration for s in segs])
    envelopes = np.array([2.0 * abs(s.amplitude) for s in segs])
    return durs, envelopes


def sequence_energy(drive: DriveScheme, t_f: float) -> EnergyReport:
    """Integrate the carrier-averaged flux Omega(t)^2 / 2 over the sequence.

    For modulated drives the per-cycle energy is the integral over one
    modulation period (for the phase scheme this is (Omega0^2+Omega1^2) T/2
    up to ramp corrections); constant drives report no cycle figure.
    """
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    durs, env = _envelope_segments(drive, t_f)
    flux = env**2 / 2.0  # carrier-cycle average of Omega^2 cos^2
    window = float(np.sum(durs))
    window_energy = float(np.sum(flux * durs))
    avg_flux = window_energy / window
    total = avg_flux * t_f
    peak = float(np.max(env) ** 2)  # peak instantaneous flux at cos^2 = 1
    per_cycle = None
    ratio = None
    if not isinstance(drive, ConstantDrive):
        per_cycle = window_energy
        if drive.omega1 > 0:
            if isinstance(drive, PhaseModulatedDrive):
                j1 = bessel_jn(1, square_wave_a1() * drive.omega1 / drive.nu)
            else:
                j1 = bessel_jn(1, drive.omega1 / drive.nu)
            omega_bar = drive.omega0 + drive.nu
            hh = sequence_energy(ConstantDrive(omega_bar), j1 * t_f)
            ratio = hh.total_energy / total
    return EnergyReport(peak_flux=peak, avg_flux=avg_flux, total_energy=total,
                        per_cycle_energy=per_cycle, ratio_hh_to_this=ratio)


class EnergyRatio(NamedTuple):
    ratio: float
    small_argument: float
    no_coupling: bool


def energy_ratio(omega0: float, omega1: float, nu: float,
                 a1: float | None = None) -> EnergyRatio:
    """Published total-energy ratio E_HH / E_ph and its small-argument form.

    ratio = (Omega0 + nu)^2 J1(a1 Omega1 / nu) / (Omega0^2 + Omega1^2);
    small-argument approximation replaces J1(x) by x/2.  Omega1 = 0 means
    no effective coupling: the ratio degenerates to 0 and is flagged.
    """
    if a1 is None:
        a1 = square_wave_a1()
    if nu <= 0:
        raise ValueError("nu must be positive")
    if omega1 == 0.0:
        return EnergyRatio(0.0, 0.0, True)
    num = (omega0 + nu) ** 2
    den = omega0**2 + omega1**2
    exact = num * bessel_jn(1, a1 * omega1 / nu) / den
    small = num * omega1 * a1 / (2.0 * nu * den)
    return EnergyRatio(float(exact), float(small), False)
