import numpy as np
import pytest

from modcw.control import (AmplitudeModulatedDrive, ConstantDrive,
                           PhaseModulatedDrive)
from modcw.power import (EnergyReport, energy_ratio, poynting_flux,
                         sequence_energy)
from modcw.system import MHZ_X2PI

OM = 1.0 * MHZ_X2PI
NU = 9.7135 * MHZ_X2PI
CARRIER = 2 * np.pi * 30.9e9  # D + |gamma_e| B at 1 T


class TestPoyntingFlux:
    def test_carrier_cycle_average(self):
        # Omega constant: <Omega^2 cos^2> = Omega^2 / 2
        ts = (np.arange(4096) + 0.5) * (2 * np.pi / CARRIER) / 4096
        avg = np.mean([poynting_flux(OM, 0.0, CARRIER, t) for t in ts])
        assert avg == pytest.approx(OM**2 / 2, rel=1e-9)

    def test_zero_at_node(self):
        t_node = (np.pi / 2) / CARRIER
        assert poynting_flux(OM, 0.0, CARRIER, t_node) == pytest.approx(0.0, abs=OM**2 * 1e-9)

    def test_cross_term_integrates_away(self):
        # slow sine modulation: the Omega dOmega/dt term integrates to ~0
        # over a full modulation period (oracle: trapezoidal quadrature)
        n = 200_001
        t = np.linspace(0.0, 2 * np.pi / NU, n)
        omega = OM - 0.5 * OM * np.sin(NU * t)
        domega = -0.5 * OM * NU * np.cos(NU * t)
        cross = (omega * domega / CARRIER) * np.sin(CARRIER * t) * np.cos(CARRIER * t)
        main = omega**2 * np.cos(CARRIER * t) ** 2
        ratio = abs(np.trapezoid(cross, t)) / np.trapezoid(main, t)
        assert ratio < 1e-6

    def test_carrier_required(self):
        with pytest.raises(ValueError):
            poynting_flux(OM, 0.0, 0.0, 0.0)


class TestSequenceEnergy:
    def test_constant_per_cycle_scaling(self):
        # duration of one modulation cycle: energy = Omega_bar^2 T / 2 = pi Omega_bar^2 / nu
        omega_bar = 10.7135 * MHZ_X2PI
        T = 2 * np.pi / NU
        rep = sequence_energy(ConstantDrive(omega_bar), T)
        assert rep.total_energy == pytest.approx(omega_bar**2 * T / 2, rel=1e-12)
        assert rep.per_cycle_energy is None

    def test_phase_per_cycle(self):
        drive = PhaseModulatedDrive(OM, OM, NU)
        rep = sequence_energy(drive, 0.205e-3)
        T = 2 * np.pi / NU
        # plateau average of (Om0 +- Om1)^2 is Om0^2 + Om1^2 (= 2 Om0^2 here);
        # the symmetric ramp phases cancel the cross term exactly
        assert rep.per_cycle_energy == pytest.approx((OM**2 + OM**2) * T / 2, rel=1e-9)
        assert rep.avg_flux == pytest.approx((OM**2 + OM**2) / 2, rel=1e-9)

    def test_peak_flux_order_of_magnitude_below_hh(self):
        drive = PhaseModulatedDrive(OM, OM, NU)
        rep = sequence_energy(drive, 0.205e-3)
        hh = sequence_energy(ConstantDrive(OM + NU), 13.45e-6)
        assert rep.peak_flux == pytest.approx((2 * OM) ** 2, rel=1e-12)
        assert hh.peak_flux / rep.peak_flux > 10

    def test_amplitude_scheme_average(self):
        drive = AmplitudeModulatedDrive(OM, 0.5 * OM, NU, samples_per_period=4096)
        rep = sequence_energy(drive, 0.205e-3)
        # <(Om0 - Om1 sin)^2> = Om0^2 + Om1^2/2
        assert rep.avg_flux == pytest.approx((OM**2 + (0.5 * OM) ** 2 / 2) / 2, rel=1e-4)

    def test_report_validation(self):
        with pytest.raises(ValueError):
            EnergyReport(peak_flux=-1.0, avg_flux=0.0, total_energy=0.0,
                         per_cycle_energy=None, ratio_hh_to_this=None)


class TestEnergyRatio:
    def test_small_argument_agreement(self):
        # arg < 0.15: exact and small-argument forms within 1%
        omega1 = 0.15 * NU / (4 / np.pi)
        r = energy_ratio(OM, omega1, NU)
        assert r.ratio == pytest.approx(r.small_argument, rel=1e-2)
        assert not r.no_coupling

    def test_no_coupling_flag(self):
        r = energy_ratio(OM, 0.0, NU)
        assert r.no_coupling
        assert r.ratio == 0.0

    def test_integration_cross_check(self):
        # formula vs integrated sequence energies at equal-signal times
        drive = PhaseModulatedDrive(OM, OM, NU)
        rep = sequence_energy(drive, 0.205e-3)
        formula = energy_ratio(OM, OM, NU).ratio
        assert rep.ratio_hh_to_this == pytest.approx(formula, rel=0.02)

    def test_requires_positive_nu(self):
        with pytest.raises(ValueError):
            energy_ratio(OM, OM, 0.0)
