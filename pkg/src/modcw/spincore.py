"""Dense complex linear algebra and spin operators for small Hilbert spaces.

Conventions used throughout the package:

* The electron pseudospin basis is ordered ``(|1>, |0>)``, so that
  ``sigma_z = |1><1| - |0><0| = diag(+1, -1)`` and
  ``sigma_x = |1><0| + |0><1|`` are the standard Pauli matrices.
  ``|+-> = (|1> +- |0>)/sqrt(2)`` are the sigma_x eigenstates.
* Nuclear spin-1/2 operators are ``I = sigma/2`` by default.  The
  alternative ``I = sigma`` is available behind the ``spin_convention``
  flag for A/B testing (it shifts nuclear precession frequencies by 2x
  and is diagnostic only).
* Full-register operators use the tensor ordering
  electron (x) nucleus_1 (x) ... (x) nucleus_N.

Everything here returns plain ``numpy.ndarray`` values; matrices are
immutable by convention (no function mutates its inputs).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

#: Renormalize long unitary products every this many multiplications.
RENORM_EVERY = 100_000

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

#: Electron basis kets, ordering (|1>, |0>).
KET_1 = np.array([1.0, 0.0], dtype=complex)
KET_0 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = (KET_1 + KET_0) / np.sqrt(2.0)
KET_MINUS = (KET_1 - KET_0) / np.sqrt(2.0)


class ContractViolation(ValueError):
    """A matrix failed a structural contract (hermiticity, unitarity, ...)."""


def spin_ops(convention: str = "half") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (Ix, Iy, Iz) for one nucleus under the given convention.

    ``"half"`` gives I = sigma/2 (physical spin-1/2); ``"one"`` gives
    I = sigma, kept only for the convention A/B test.
    """
    if convention == "half":
        return PAULI_X / 2, PAULI_Y / 2, PAULI_Z / 2
    if convention == "one":
        return PAULI_X.copy(), PAULI_Y.copy(), PAULI_Z.copy()
    raise ValueError(f"unknown spin convention {convention!r}")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with electron-first ordering."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolation("kron: first factor is not square")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ContractViolation("kron: second factor is not square")
    return np.kron(a, b)


def kron_all(factors) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = kron(out, f)
    return out


def embed(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """Place a single-site operator at ``site`` in an n_sites register of qubits."""
    return kron_all([op if k == site else ID2 for k in range(n_sites)])


def max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermiticity_defect(h: np.ndarray) -> float:
    """Max-norm of (H - H^dag), relative to the matrix scale."""
    scale = max(max_abs(h), 1.0)
    return max_abs(h - h.conj().T) / scale


def is_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(h) < tol


def unitarity_defect(u: np.ndarray) -> float:
    """Max-norm of (U^dag U - 1)."""
    return max_abs(u.conj().T @ u - np.eye(u.shape[0]))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) < tol


def herm_exp(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h, via eigendecomposition.

    Exact up to diagonalization error; preferred over series methods at
    these dimensions (<= 64).  Raises ContractViolation for
    non-Hermitian input.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ContractViolation(
            f"herm_exp: input not Hermitian (defect {hermiticity_defect(h):.3e})"
        )
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def herm_exp_batched(h_stack: np.ndarray, dts: np.ndarray) -> np.ndarray:
    """exp(-i H_k t_k) for a stack of Hermitian matrices (k, d, d).

    Hot path used by the propagation core; hermiticity is the caller's
    responsibility (the builders only produce Hermitian matrices).
    """
    w, v = np.linalg.eigh(h_stack)
    phases = np.exp(-1j * w * dts[:, None])
    return (v * phases[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def polar_project(u: np.ndarray) -> tuple[np.ndarray, float]:
    """Nearest unitary to u (polar factor) and the applied correction norm."""
    w, _, vh = np.linalg.svd(u)
    proj = w @ vh
    return proj, max_abs(proj - u)


@dataclass
class UnitaryProduct:
    """Ordered product of unitaries with the long-chain renormalization policy.

    Multiplications are counted; every ``RENORM_EVERY`` products the
    accumulated matrix is projected back onto the unitary group (polar
    decomposition) and the correction norm is logged and accumulated in
    ``correction_total``.
    """

    matrix: np.ndarray
    multiplications: int = 0
    correction_total: float = 0.0
    _since_renorm: int = 0

    @classmethod
    def identity(cls, dim: int) -> "UnitaryProduct":
        return cls(np.eye(dim, dtype=complex))

    def apply(self, u: np.ndarray, count: int = 1) -> None:
        """Left-multiply by u (u acts after the current product)."""
        self.matrix = u @ self.matrix
        self.multiplications += count
        self._since_renorm += count
        if self._since_renorm >= RENORM_EVERY:
            self.renormalize()

    def renormalize(self) -> None:
        self.matrix, corr = polar_project(self.matrix)
        self.correction_total += corr
        self._since_renorm = 0
        log.info("unitary product renormalized, correction norm %.3e", corr)


def ordered_product(us: np.ndarray, accumulator: UnitaryProduct | None = None) -> UnitaryProduct:
    """Time-ordered product U_n ... U_2 U_1 of a stack (n, d, d).

    Pairwise (tree) reduction: adjacent factors are combined first, which
    keeps the association order deterministic and the chain shallow.
    """
    n, dim, _ = us.shape
    acc = accumulator if accumulator is not None else UnitaryProduct.identity(dim)
    if n == 0:
        return acc
    block = us
    count = 0
    while block.shape[0] > 1:
        m = block.shape[0]
        count += m // 2
        if m % 2:
            tail = block[-1][None]
            block = np.concatenate([np.matmul(block[1:-1:2], block[0:-1:2]), tail], axis=0)
        else:
            block = np.matmul(block[1::2], block[0::2])
    acc.apply(block[0], count=count + 1)
    return acc


def matrix_power_unitary(u: np.ndarray, n: int) -> UnitaryProduct:
    """u^n by binary powering, through the renormalizing accumulator."""
    acc = UnitaryProduct.identity(u.shape[0])
    base = u
    k = n
    while k > 0:
        if k & 1:
            acc.apply(base)
        k >>= 1
        if k:
            base = base @ base
            acc.multiplications += 1
    return acc


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix: Hermitian, unit trace, positive within tolerance."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractViolation("density matrix must be square")
        if not is_hermitian(m):
            raise ContractViolation("density matrix not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ContractViolation(f"density matrix trace {np.trace(m).real} != 1")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ContractViolation("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def thermal_plus_state(n_nuclei: int) -> DensityMatrix:
    """|+><+| on the electron, maximally mixed (1/2 per spin) nuclei."""
    rho = np.outer(KET_PLUS, KET_PLUS.conj())
    for _ in range(n_nuclei):
        rho = np.kron(rho, ID2 / 2)
    return DensityMatrix(rho)


def expect(rho: DensityMatrix | np.ndarray, obs: np.ndarray) -> float:
    """Tr(rho obs) for Hermitian obs; the imaginary residue must be < 1e-10."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    obs = np.asarray(obs)
    if m.shape != obs.shape:
        raise ContractViolation(f"expect: dimension mismatch {m.shape} vs {obs.shape}")
    if not is_hermitian(obs):
        raise ContractViolation("expect: observable not Hermitian")
    val = np.trace(m @ obs)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ContractViolation(f"expect: imaginary residue {val.imag:.3e}")
    return float(val.real)


def rotate_spin_identity_check(axis: np.ndarray, angle: float, b: np.ndarray) -> float:
    """Residual of the spin rotation identity used in the frame transformations.

    Compares exp(i I.axis phi) (I.b) exp(-i I.axis phi) computed by matrix
    conjugation against the closed form
    [b - (b.l)l] cos(phi) - l x b sin(phi) + (b.l)l contracted with I,
    for spin-1/2 operators.  Returns the max-norm difference.
    """
    axis = np.asarray(axis, dtype=float)
    b = np.asarray(b, dtype=float)
    if abs(np.linalg.norm(axis) - 1.0) > 1e-9:
        raise ContractViolation("rotate_spin_identity_check: axis must be a unit vector")
    ix, iy, iz = spin_ops("half")
    i_axis = axis[0] * ix + axis[1] * iy + axis[2] * iz
    i_b = b[0] * ix + b[1] * iy + b[2] * iz
    u = herm_exp(i_axis, -angle)  # exp(+i I.axis angle)
    lhs = u @ i_b @ u.conj().T
    b_par = (b @ axis) * axis
    vec = (b - b_par) * np.cos(angle) - np.cross(axis, b) * np.sin(angle) + b_par
    rhs = vec[0] * ix + vec[1] * iy + vec[2] * iz
    return max_abs(lhs - rhs)
