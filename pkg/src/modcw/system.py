"""Physical system description: NV parameters, nuclei, frames, couplings.

All frequencies are angular (rad/s); positions are meters; fields are
tesla.  Helper constants carry the 2*pi so that, e.g.,
``10.705 * MHZ_X2PI`` is the 13C gyromagnetic frequency at 1 T.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi
HZ_X2PI = TWO_PI
KHZ_X2PI = TWO_PI * 1e3
MHZ_X2PI = TWO_PI * 1e6
GHZ_X2PI = TWO_PI * 1e9

MU0 = 4.0e-7 * np.pi  # T m / A
HBAR = 1.054571817e-34  # J s

#: 13C gyromagnetic ratio, rad/s/T.
GAMMA_C13 = 10.705 * MHZ_X2PI
#: NV electron gyromagnetic ratio, rad/s/T (negative).
GAMMA_E = -28.024 * GHZ_X2PI
#: NV zero-field splitting, rad/s.
NV_D = 2.87 * GHZ_X2PI

Z_HAT = np.array([0.0, 0.0, 1.0])


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class NVParams:
    """Static NV constants and the applied axial field."""

    B_z: float  # tesla
    D: float = NV_D  # rad/s
    gamma_e: float = GAMMA_E  # rad/s/T

    def __post_init__(self):
        if self.D <= 0:
            raise ModelError("NVParams.D must be positive")
        if self.B_z < 0:
            raise ModelError("NVParams.B_z must be >= 0")


@dataclass(frozen=True)
class Nucleus:
    """One spin-1/2 nucleus: gyromagnetic ratio, hyperfine vector, optional position.

    If ``position`` is given, the hyperfine vector must agree with the
    point-dipole formula (it is normally derived from it via
    :meth:`from_position`).
    """

    hyperfine: np.ndarray  # rad/s, 3-vector
    gamma: float = GAMMA_C13  # rad/s/T
    position: np.ndarray | None = None  # meters, 3-vector

    def __post_init__(self):
        a = np.asarray(self.hyperfine, dtype=float)
        if a.shape != (3,):
            raise ModelError("hyperfine must be a 3-vector")
        object.__setattr__(self, "hyperfine", a)
        if self.position is not None:
            r = np.asarray(self.position, dtype=float)
            if r.shape != (3,) or np.linalg.norm(r) == 0.0:
                raise ModelError("position must be a nonzero 3-vector")
            object.__setattr__(self, "position", r)
            ref = hyperfine_from_position(r, GAMMA_E, self.gamma)
            scale = max(np.max(np.abs(ref)), 1.0)
            if np.max(np.abs(ref - a)) > 1e-6 * scale:
                raise ModelError("hyperfine vector inconsistent with position dipole formula")

    @classmethod
    def from_position(cls, position, gamma: float = GAMMA_C13, gamma_e: float = GAMMA_E) -> "Nucleus":
        r = np.asarray(position, dtype=float)
        return cls(hyperfine=hyperfine_from_position(r, gamma_e, gamma), gamma=gamma, position=r)


def hyperfine_from_position(r, gamma_e: float, gamma_n: float) -> np.ndarray:
    """Point-dipole hyperfine vector A(r) = mu0 hbar ge gn / (4 pi r^3) [z - 3 (z.r^)r^].

    Uses the standard mu0/(4 pi) dipolar prefactor (the printed shorthand
    omits it); gammas in rad/s/T, result in rad/s.
    """
    r = np.asarray(r, dtype=float)
    dist = np.linalg.norm(r)
    if dist == 0.0:
        raise ModelError("hyperfine_from_position: zero separation")
    r_hat = r / dist
    pref = MU0 * HBAR * gamma_e * gamma_n / (4.0 * np.pi * dist**3)
    return pref * (Z_HAT - 3.0 * (Z_HAT @ r_hat) * r_hat)


def internuclear_g(r_j, r_l, gamma: float = GAMMA_C13) -> float:
    """Secular homonuclear dipolar coefficient between nuclei at r_j, r_l.

    g = mu0 hbar gamma^2 / (4 pi r^3) * [1 - 3 n_z^2] / 4, rad/s; the
    trailing 1/4 keeps the printed convention in which g multiplies
    (2 Iz Iz - Ix Ix - Iy Iy).  Preset cluster couplings bypass this and
    use the published numeric values directly.
    """
    d = np.asarray(r_l, dtype=float) - np.asarray(r_j, dtype=float)
    dist = np.linalg.norm(d)
    if dist == 0.0:
        raise ModelError("internuclear_g: coincident positions")
    n_z = d[2] / dist
    return MU0 * HBAR * gamma**2 / (4.0 * np.pi * dist**3) * (1.0 - 3.0 * n_z**2) / 4.0


@dataclass(frozen=True)
class NuclearFrame:
    """Rotating-frame data for one nucleus.

    ``omega_vec = (-Ax/2, -Ay/2, gamma B - Az/2)`` is the effective
    precession vector; the frame axes are x along the hyperfine component
    perpendicular to omega_hat, y along omega_hat x A, z along omega_hat.
    ``a_par_z`` is the signed projection A . omega_hat.  ``no_coupling``
    flags the degenerate case A parallel to omega_hat (A_perp = 0).
    """

    omega_vec: np.ndarray
    omega_n: float
    omega_hat: np.ndarray
    a_perp_x: float
    a_perp_y: float
    a_par_z: float
    x_hat: np.ndarray
    y_hat: np.ndarray
    z_hat: np.ndarray
    no_coupling: bool = False


def nuclear_frame(nucleus: Nucleus, nv: NVParams) -> NuclearFrame:
    """Exact precession vector and Eq.-of-motion frame for one nucleus."""
    a = nucleus.hyperfine
    omega_l = nucleus.gamma * nv.B_z
    omega_vec = np.array([-a[0] / 2.0, -a[1] / 2.0, omega_l - a[2] / 2.0])
    omega_n = float(np.linalg.norm(omega_vec))
    if omega_n == 0.0:
        raise ModelError("nuclear_frame: zero precession vector")
    omega_hat = omega_vec / omega_n
    a_par = float(a @ omega_hat)
    perp = a - a_par * omega_hat
    a_perp = float(np.linalg.norm(perp))
    cross = np.cross(omega_hat, a)
    if a_perp < 1e-12 * max(1.0, float(np.linalg.norm(a))):
        # degenerate: hyperfine parallel to the precession axis
        x_hat = _any_orthonormal(omega_hat)
        y_hat = np.cross(omega_hat, x_hat)
        return NuclearFrame(omega_vec, omega_n, omega_hat, 0.0, 0.0, a_par,
                            x_hat, y_hat, omega_hat, no_coupling=True)
    x_hat = perp / a_perp
    y_hat = cross / np.linalg.norm(cross)
    return NuclearFrame(omega_vec, omega_n, omega_hat, a_perp, float(np.linalg.norm(cross)),
                        a_par, x_hat, y_hat, omega_hat)


def _any_orthonormal(v: np.ndarray) -> np.ndarray:
    trial = np.array([1.0, 0.0, 0.0]) if abs(v[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    out = trial - (trial @ v) * v
    return out / np.linalg.norm(out)


def resonance_frequency_approx(nucleus: Nucleus, nv: NVParams) -> float:
    """Linearized nuclear resonance frequency gamma B_z - A_z/2 (rad/s)."""
    return nucleus.gamma * nv.B_z - nucleus.hyperfine[2] / 2.0


@dataclass(frozen=True)
class SystemModel:
    """NV + nuclear register with internuclear couplings.

    ``couplings`` maps unordered index pairs (j, l) to g_{j,l} in rad/s;
    it is stored symmetric with a zero diagonal.  ``nn_form`` selects the
    internuclear operator: "secular" (2 IzIz - IxIx - IyIy, default) or
    "zz" (2 IzIz) for sensitivity checks.
    """

    nv: NVParams
    nuclei: tuple[Nucleus, ...]
    couplings: dict = field(default_factory=dict)
    spin_convention: str = "half"
    nn_form: str = "secular"

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        if self.spin_convention not in ("half", "one"):
            raise ModelError(f"unknown spin convention {self.spin_convention!r}")
        if self.nn_form not in ("secular", "zz"):
            raise ModelError(f"unknown internuclear form {self.nn_form!r}")
        n = len(self.nuclei)
        sym: dict[tuple[int, int], float] = {}
        for (j, l), g in dict(self.couplings).items():
            if j == l:
                raise ModelError("couplings: diagonal entries are not allowed")
            if not (0 <= j < n and 0 <= l < n):
                raise ModelError(f"couplings: index pair ({j},{l}) out of range")
            key = (min(j, l), max(j, l))
            if key in sym and sym[key] != g:
                raise ModelError(f"couplings: conflicting values for pair {key}")
            sym[key] = float(g)
        object.__setattr__(self, "couplings", sym)

    @property
    def n_nuclei(self) -> int:
        return len(self.nuclei)

    @property
    def dim(self) -> int:
        return 2 ** (self.n_nuclei + 1)

    def frames(self) -> list[NuclearFrame]:
        return [nuclear_frame(nuc, self.nv) for nuc in self.nuclei]

    def coupling(self, j: int, l: int) -> float:
        return self.couplings.get((min(j, l), max(j, l)), 0.0)

    def single_spin_subsystem(self, j: int) -> "SystemModel":
        """The same NV with only nucleus j retained (no couplings)."""
        return SystemModel(self.nv, (self.nuclei[j],), {}, self.spin_convention, self.nn_form)

    # --- config serialization (harness format) ---

    def to_config(self) -> dict:
        cfg: dict = {
            "b_field_T": self.nv.B_z,
            "spin_convention": self.spin_convention,
            "nn_form": self.nn_form,
            "nuclei": [
                {
                    "gamma_MHz_per_T_x2pi": nuc.gamma / MHZ_X2PI,
                    "hyperfine_kHz_x2pi": [a / KHZ_X2PI for a in nuc.hyperfine],
                }
                for nuc in self.nuclei
            ],
        }
        if self.couplings:
            cfg["couplings_Hz_x2pi"] = {
                f"{j},{l}": g / HZ_X2PI for (j, l), g in sorted(self.couplings.items())
            }
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "SystemModel":
        try:
            nv = NVParams(B_z=float(cfg["b_field_T"]))
        except KeyError:
            raise ModelError("system.b_field_T is required")
        nuclei = []
        for k, entry in enumerate(cfg.get("nuclei", [])):
            if "hyperfine_kHz_x2pi" not in entry:
                raise ModelError(f"system.nuclei[{k}].hyperfine_kHz_x2pi is required")
            a = np.asarray(entry["hyperfine_kHz_x2pi"], dtype=float) * KHZ_X2PI
            gamma = float(entry.get("gamma_MHz_per_T_x2pi", GAMMA_C13 / MHZ_X2PI)) * MHZ_X2PI
            nuclei.append(Nucleus(hyperfine=a, gamma=gamma))
        if not nuclei:
            raise ModelError("system.nuclei must list at least one nucleus")
        couplings = {}
        for key, val in (cfg.get("couplings_Hz_x2pi") or {}).items():
            try:
                j, l = (int(x) for x in str(key).split(","))
            except ValueError:
                raise ModelError(f"system.couplings_Hz_x2pi key {key!r} is not 'j,l'")
            couplings[(j, l)] = float(val) * HZ_X2PI
        return cls(
            nv=nv,
            nuclei=tuple(nuclei),
            couplings=couplings,
            spin_convention=cfg.get("spin_convention", "half"),
            nn_form=cfg.get("nn_form", "secular"),
        )
