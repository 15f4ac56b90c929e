"""modcw: modulated continuous-wave electron-nuclear spin coupling toolkit.

Simulates an NV-center pseudospin coupled to nearby spin-1/2 nuclei
under constant, phase-modulated, or amplitude-modulated microwave
driving, together with the closed-form resonance/selectivity/energy
predictions, Ornstein-Uhlenbeck control-noise ensembles, and a scan
harness that emits reproducible CSV/JSON spectra.
"""

__version__ = "0.1.0"

from .analytic import (bessel_j1, bessel_jn, effective_coupling_phase,
                       fwhm_hh, fwhm_phase, fwhm_predicted,
                       fwhm_ratio_equal_depth, hh_signal,
                       hh_time_for_equal_signal, predict, resonance_branches,
                       signal_amp, signal_detuned, signal_phase)
from .control import (AmplitudeModulatedDrive, ConstantDrive, DriveScheme,
                      PhaseModulatedDrive, WaveformSegment, discretize,
                      fourier_coeffs, modulation_F)
from .dynamics import (PropagationResult, PropagatorCache, SimulationTask,
                       build_hamiltonian, propagate, propagate_periodic_cached)
from .noise import NoisePath, NoiseSpec, ensemble_signal, ou_path, ou_step
from .power import EnergyReport, energy_ratio, poynting_flux, sequence_energy
from .system import (GAMMA_C13, GAMMA_E, KHZ_X2PI, MHZ_X2PI, NVParams,
                     Nucleus, SystemModel, hyperfine_from_position,
                     internuclear_g, nuclear_frame,
                     resonance_frequency_approx)
