"""Drive waveforms: constant, phase-modulated and amplitude-modulated schemes.

A discretized drive is a list of :class:`WaveformSegment`, each holding a
duration and the complex amplitude ``c`` multiplying ``|1><0|`` in the
rotating frame (``c = (Omega0 + Omega1 e^{i phi})/2`` for the two-tone
phase scheme, ``Omega(t)/2`` for the single-tone schemes).

The ideal modulation function is the even square wave
``F(t) = sign(cos(nu t))`` (so t = 0 sits mid-plateau and the fundamental
Fourier coefficient is a1 = 4/pi).  The segment list for one period is
laid out starting at a plateau edge; a global time offset of the drive
does not affect any measured population, so the two conventions are
compatible and each is pinned where it matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class DriveError(ValueError):
    pass


@dataclass(frozen=True)
class WaveformSegment:
    duration: float  # s
    amplitude: complex  # rad/s, multiplies |1><0| (+ H.c.)

    def __post_init__(self):
        if self.duration <= 0:
            raise DriveError("segment duration must be positive")


@dataclass(frozen=True)
class ConstantDrive:
    """Unmodulated drive at the Hartmann-Hahn working point."""

    omega_bar: float  # rad/s

    def __post_init__(self):
        if self.omega_bar < 0:
            raise DriveError("omega_bar must be >= 0")

    period = None

    @property
    def scheme(self) -> str:
        return "constant"


@dataclass(frozen=True)
class PhaseModulatedDrive:
    """Two-tone drive with the second tone's phase flipped 0 <-> pi.

    Flips take ``t_flip`` seconds in ``n_flip_steps`` equal discrete
    steps of linearly advancing phase; the tone amplitudes are held
    constant during flips.
    """

    omega0: float  # rad/s
    omega1: float  # rad/s
    nu: float  # rad/s, modulation frequency
    t_flip: float = 5e-9  # s
    n_flip_steps: int = 20

    def __post_init__(self):
        if self.omega0 < 0 or self.omega1 < 0:
            raise DriveError("Rabi amplitudes must be >= 0")
        if self.nu <= 0:
            raise DriveError("modulation frequency nu must be positive")
        if self.n_flip_steps < 1:
            raise DriveError("n_flip_steps must be >= 1")
        if self.t_flip < 0:
            raise DriveError("t_flip must be >= 0")
        if self.t_flip * self.nu / TWO_PI >= 0.1:
            raise DriveError("t_flip must be short relative to the modulation period")

    @property
    def period(self) -> float:
        return TWO_PI / self.nu

    @property
    def scheme(self) -> str:
        return "phase"

    def with_nu(self, nu: float) -> "PhaseModulatedDrive":
        return PhaseModulatedDrive(self.omega0, self.omega1, nu, self.t_flip, self.n_flip_steps)


@dataclass(frozen=True)
class AmplitudeModulatedDrive:
    """Single tone with Omega(t) = Omega0 - Omega1 sin(nu t)."""

    omega0: float
    omega1: float
    nu: float
    samples_per_period: int = 256

    def __post_init__(self):
        if self.omega0 < 0 or self.omega1 < 0:
            raise DriveError("Rabi amplitudes must be >= 0")
        if self.nu <= 0:
            raise DriveError("modulation frequency nu must be positive")
        if self.samples_per_period < 2:
            raise DriveError("samples_per_period must be >= 2")

    @property
    def period(self) -> float:
        return TWO_PI / self.nu

    @property
    def scheme(self) -> str:
        return "amplitude"

    def with_nu(self, nu: float) -> "AmplitudeModulatedDrive":
        return AmplitudeModulatedDrive(self.omega0, self.omega1, nu, self.samples_per_period)


DriveScheme = ConstantDrive | PhaseModulatedDrive | AmplitudeModulatedDrive


def modulation_F(t, nu: float):
    """Even square wave F(t) = sign(cos(nu t)); +1 on the cos >= 0 half."""
    return np.where(np.cos(np.asarray(t, dtype=float) * nu) >= 0.0, 1.0, -1.0)


def fourier_coeffs(nu: float, n_max: int, f=None, nodes: int = 64):
    """Fourier coefficients (a_n, b_n), n = 1..n_max, of a period-T modulation.

    Evaluates the defining integrals (2/T) int_0^T F(t) cos/sin(n nu t) dt
    by Gauss-Legendre quadrature on piecewise-smooth subintervals.  ``f``
    defaults to the square wave :func:`modulation_F`; for the default the
    breakpoints at T/4 and 3T/4 are honored exactly.
    """
    if n_max < 1:
        raise DriveError("n_max must be >= 1")
    period = TWO_PI / nu
    if f is None:
        func = lambda t: modulation_F(t, nu)
        breaks = [0.0, period / 4, 3 * period / 4, period]
    else:
        func = f
        breaks = [0.0, period]
    x, w = np.polynomial.legendre.leggauss(nodes)
    a = np.zeros(n_max)
    b = np.zeros(n_max)
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        half = (hi - lo) / 2.0
        t = lo + half * (x + 1.0)
        ft = func(t)
        for n in range(1, n_max + 1):
            a[n - 1] += (2.0 / period) * half * np.sum(w * ft * np.cos(n * nu * t))
            b[n - 1] += (2.0 / period) * half * np.sum(w * ft * np.sin(n * nu * t))
    return a, b


def square_wave_a1() -> float:
    """Fundamental coefficient of the even square wave."""
    return 4.0 / np.pi


def period_segments(drive: DriveScheme) -> list[WaveformSegment]:
    """Segment list for a single modulation period.

    Phase scheme: plateau(phi=0), t_flip ramp up, plateau(phi=pi),
    t_flip ramp down; plateaus are shortened so the total is exactly T.
    Amplitude scheme: samples_per_period equal segments with Omega taken
    at midpoints.  Constant drives have no period (see
    :func:`constant_segments`).
    """
    if isinstance(drive, ConstantDrive):
        raise DriveError("a constant drive has no modulation period")
    period = drive.period
    if isinstance(drive, PhaseModulatedDrive):
        if 2.0 * drive.t_flip >= period:
            raise DriveError("phase-flip ramps overlap: 2 t_flip exceeds the period")
        plateau = period / 2.0 - drive.t_flip
        segs = [WaveformSegment(plateau, (drive.omega0 + drive.omega1) / 2.0)]
        segs += _ramp(drive, 0.0)
        segs.append(WaveformSegment(plateau, (drive.omega0 - drive.omega1) / 2.0))
        segs += _ramp(drive, np.pi)
        return segs
    n = drive.samples_per_period
    dt = period / n
    mids = (np.arange(n) + 0.5) * dt
    omega = drive.omega0 - drive.omega1 * np.sin(drive.nu * mids)
    return [WaveformSegment(dt, complex(om / 2.0)) for om in omega]


def _ramp(drive: PhaseModulatedDrive, phi0: float) -> list[WaveformSegment]:
    if drive.t_flip == 0.0:
        return []
    n = drive.n_flip_steps
    dt = drive.t_flip / n
    out = []
    for k in range(1, n + 1):
        phi = phi0 + (k - 0.5) * np.pi / n
        out.append(WaveformSegment(dt, (drive.omega0 + drive.omega1 * np.exp(1j * phi)) / 2.0))
    return out


def constant_segments(drive: ConstantDrive, horizon: float,
                      max_segment: float | None = None) -> list[WaveformSegment]:
    """Constant drive over ``horizon`` seconds.

    One segment by default; ``max_segment`` splits it (needed when a
    noise path must be sampled along the sequence).
    """
    if horizon <= 0:
        raise DriveError("horizon must be positive")
    if max_segment is None or max_segment >= horizon:
        return [WaveformSegment(horizon, drive.omega_bar / 2.0)]
    n = int(np.ceil(horizon / max_segment))
    dt = horizon / n
    return [WaveformSegment(dt, drive.omega_bar / 2.0)] * n


def discretize(drive: DriveScheme, periods: int, samples_per_period: int | None = None,
               horizon: float | None = None) -> list[WaveformSegment]:
    """Full segment list for ``periods`` modulation periods.

    The per-period pattern is identical for every period (this is what
    makes period-propagator caching exact).  For constant drives
    ``horizon`` gives the requested duration and ``periods`` is ignored.
    """
    if isinstance(drive, ConstantDrive):
        if horizon is None:
            raise DriveError("constant drive discretization requires a horizon")
        return constant_segments(drive, horizon)
    if periods < 1:
        raise DriveError("periods must be >= 1")
    if samples_per_period is not None and isinstance(drive, AmplitudeModulatedDrive):
        drive = AmplitudeModulatedDrive(drive.omega0, drive.omega1, drive.nu, samples_per_period)
    return period_segments(drive) * periods
