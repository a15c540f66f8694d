"""Density matrices, Hilbert-Schmidt form, canonical form and state families."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import matkit
from .errors import DimensionError, InputError, NotAStateError

STATE_TOL = 1e-10

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Bipartite density matrix on ``dims[0] x dims[1]``.

    Construction validates Hermiticity, unit trace and positivity, each to
    ``STATE_TOL``; the stored matrix is kept exactly as given.
    """

    matrix: np.ndarray
    dims: tuple[int, int] = (2, 2)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 2 or min(dims) < 1:
            raise DimensionError(f"dims must be two positive counts, got {self.dims}")
        n = dims[0] * dims[1]
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} does not match dims {dims}")
        skew = float(np.max(np.abs(m - m.conj().T)))
        if skew > STATE_TOL:
            raise NotAStateError("hermitian", skew, f"not Hermitian: max |M - M^dagger| = {skew:.3g}")
        tr_dev = abs(np.trace(m).real - 1.0)
        if tr_dev > STATE_TOL:
            raise NotAStateError("trace", tr_dev, f"trace deviates from 1 by {tr_dev:.6g}")
        lam_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
        if lam_min < -STATE_TOL:
            raise NotAStateError("psd", -lam_min, f"negative eigenvalue {lam_min:.6g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def size(self) -> int:
        return self.dims[0] * self.dims[1]

    def eigenvalues(self) -> np.ndarray:
        return matkit.hermitian_eig(self.matrix).values

    def reduced(self, party: str) -> np.ndarray:
        return matkit.reduce_to(self.matrix, self.dims, party)

    def partial_transpose(self, on: str = "B") -> np.ndarray:
        return matkit.partial_transpose(self.matrix, self.dims, on)


@dataclass(frozen=True)
class HilbertSchmidtForm:
    """Two-qubit Pauli expansion: Bloch vectors of both reductions and the T-matrix."""

    rA: np.ndarray
    rB: np.ndarray
    T: np.ndarray


@dataclass(frozen=True)
class GeneratorBasis:
    d: int
    generators: tuple = field(repr=False)

    def __len__(self):
        return len(self.generators)


def _require_qubits(rho: DensityMatrix):
    if rho.dims != (2, 2):
        raise DimensionError(f"two-qubit state required, got dims {rho.dims}")


@lru_cache(maxsize=None)
def _pauli_products():
    local_a = tuple(np.kron(p, I2) for p in PAULI)
    local_b = tuple(np.kron(I2, p) for p in PAULI)
    corr = tuple(tuple(np.kron(p, q) for q in PAULI) for p in PAULI)
    return local_a, local_b, corr


def to_hilbert_schmidt(rho: DensityMatrix) -> HilbertSchmidtForm:
    _require_qubits(rho)
    m = rho.matrix
    la, lb, corr = _pauli_products()
    rA = np.array([np.trace(p @ m).real for p in la])
    rB = np.array([np.trace(p @ m).real for p in lb])
    T = np.array([[np.trace(corr[n][k] @ m).real for k in range(3)] for n in range(3)])
    return HilbertSchmidtForm(rA, rB, T)


def hs_matrix(rA, rB, T) -> np.ndarray:
    """Assemble ``(1/4)(I + rA.s x I + I x rB.s + sum T_nm s_n x s_m)`` without validation."""
    la, lb, corr = _pauli_products()
    m = np.eye(4, dtype=complex)
    for n in range(3):
        m = m + rA[n] * la[n] + rB[n] * lb[n]
        for k in range(3):
            m = m + T[n][k] * corr[n][k]
    return 0.25 * m


def from_hilbert_schmidt(h: HilbertSchmidtForm) -> DensityMatrix:
    """Inverse of :func:`to_hilbert_schmidt`; raises NotAStateError if not PSD."""
    return DensityMatrix(hs_matrix(h.rA, h.rB, h.T), (2, 2))


def canonical_form(rho: DensityMatrix):
    """Rotate a two-qubit state so that its T-matrix is diagonal.

    Uses a real SVD of T with determinant fixing so that both rotations are
    proper (in SO(3), hence realisable by local unitaries). Diagonal entries are
    ordered by decreasing magnitude and carry a common sign: all negative when
    ``det T < 0``, otherwise all nonnegative.

    Returns
    -------
    canonical : DensityMatrix
    rotations : tuple of numpy.ndarray
        ``(O_A, O_B)`` with ``T' = O_A T O_B^T``, ``rA' = O_A rA``, ``rB' = O_B rB``.
    """
    h = to_hilbert_schmidt(rho)
    u, s, vt = np.linalg.svd(h.T)
    v = vt.T
    signs = np.ones(3)
    if np.linalg.det(u) < 0:
        u[:, 2] *= -1
        signs[2] *= -1
    if np.linalg.det(v) < 0:
        v[:, 2] *= -1
        signs[2] *= -1
    # T = u diag(signs*s) v^T; paired flips on A move the sign pattern
    diag = signs * s
    target = -1.0 if (np.prod(diag) < 0 and s[-1] > 0) else 1.0
    flip = np.where(np.sign(diag) * target < 0)[0]
    if flip.size % 2 == 1:
        # an odd count only happens with a zero entry; pair it with the last axis
        flip = np.array(sorted(set(flip.tolist()) ^ {2}))
    for k in flip:
        u[:, k] *= -1
    o_a = u.T
    o_b = v.T
    rA = o_a @ h.rA
    rB = o_b @ h.rB
    T = o_a @ h.T @ o_b.T
    return DensityMatrix(hs_matrix(rA, rB, T), (2, 2)), (o_a, o_b)


def rotate_hs(h: HilbertSchmidtForm, o_a, o_b) -> HilbertSchmidtForm:
    """Apply Bloch-sphere rotations: ``rA -> O_A rA``, ``T -> O_A T O_B^T``."""
    o_a = np.asarray(o_a)
    o_b = np.asarray(o_b)
    return HilbertSchmidtForm(o_a @ h.rA, o_b @ h.rB, o_a @ h.T @ o_b.T)


# --- families ---------------------------------------------------------------

_SQ2 = 1 / np.sqrt(2)
BELL_BASIS = np.array(
    [
        [_SQ2, 0, 0, _SQ2],  # Phi+
        [_SQ2, 0, 0, -_SQ2],  # Phi-
        [0, _SQ2, _SQ2, 0],  # Psi+
        [0, _SQ2, -_SQ2, 0],  # Psi-
    ],
    dtype=complex,
)


def _unit_interval(name, x):
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise InputError(f"{name} must lie in [0, 1], got {x}")
    return x


def _pure(psi, dims):
    psi = np.asarray(psi, dtype=complex)
    return DensityMatrix(np.outer(psi, psi.conj()), dims)


def pure(p) -> DensityMatrix:
    """``sqrt(p)|00> + sqrt(1-p)|11>``."""
    p = _unit_interval("p", p)
    return _pure([np.sqrt(p), 0, 0, np.sqrt(1 - p)], (2, 2))


def pure_closest(p) -> DensityMatrix:
    """``p|00><00| + (1-p)|11><11|``, the closest separable state of :func:`pure`."""
    p = _unit_interval("p", p)
    return DensityMatrix(np.diag([p, 0, 0, 1 - p]).astype(complex), (2, 2))


def bell_diagonal(*weights, lambdas=None) -> DensityMatrix:
    """Mixture of Phi+, Phi-, Psi+, Psi- with weights ``lambdas``."""
    if lambdas is None:
        lambdas = tuple(weights[0]) if len(weights) == 1 else weights
    lam = np.asarray(lambdas, dtype=float)
    if lam.shape != (4,) or np.any(lam < 0) or abs(lam.sum() - 1) > 1e-12:
        raise InputError(f"bell_diagonal needs four nonnegative weights summing to 1, got {lambdas}")
    m = sum(w * np.outer(b, b.conj()) for w, b in zip(lam, BELL_BASIS))
    return DensityMatrix(m, (2, 2))


def werner(F) -> DensityMatrix:
    """Singlet fraction ``F``, the rest spread evenly over the triplet."""
    F = _unit_interval("F", F)
    return bell_diagonal((1 - F) / 3, (1 - F) / 3, (1 - F) / 3, F)


def maximally_correlated(amplitudes, d=None) -> DensityMatrix:
    """``sum_i a_i |ii>`` in ``d x d``."""
    a = np.asarray(amplitudes, dtype=complex)
    d = len(a) if d is None else int(d)
    if a.ndim != 1 or len(a) != d or d < 2:
        raise InputError(f"need d >= 2 amplitudes, got {len(a)} for d={d}")
    if abs(np.vdot(a, a).real - 1) > 1e-12:
        raise InputError("amplitudes must have unit norm")
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = a
    return _pure(psi, (d, d))


def isotropic(d, F) -> DensityMatrix:
    """``F |Phi_d><Phi_d| + (1-F)(I - |Phi_d><Phi_d|)/(d^2-1)``."""
    d = int(d)
    if d < 2:
        raise InputError(f"d must be >= 2, got {d}")
    F = _unit_interval("F", F)
    phi = np.zeros(d * d, dtype=complex)
    phi[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    proj = np.outer(phi, phi.conj())
    m = F * proj + (1 - F) * (np.eye(d * d) - proj) / (d * d - 1)
    return DensityMatrix(m, (d, d))


def product(rho_a, rho_b) -> DensityMatrix:
    rho_a = np.asarray(rho_a, dtype=complex)
    rho_b = np.asarray(rho_b, dtype=complex)
    return DensityMatrix(np.kron(rho_a, rho_b), (rho_a.shape[0], rho_b.shape[0]))


def qubit(bloch) -> np.ndarray:
    """Single-qubit density matrix with Bloch vector ``bloch``."""
    r = np.asarray(bloch, dtype=float)
    if r.shape != (3,) or np.linalg.norm(r) > 1 + 1e-12:
        raise InputError(f"Bloch vector must be a 3-vector of norm <= 1, got {bloch}")
    return 0.5 * (I2 + sum(x * p for x, p in zip(r, PAULI)))


FAMILIES = {
    "pure": pure,
    "pure_closest": pure_closest,
    "bell_diagonal": bell_diagonal,
    "werner": werner,
    "maximally_correlated": maximally_correlated,
    "isotropic": isotropic,
    "product": product,
}


def make_family(name: str, **params) -> DensityMatrix:
    """Build a named state family, e.g. ``make_family("werner", F=0.8)``."""
    try:
        builder = FAMILIES[name]
    except KeyError:
        raise InputError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {name}: {exc}") from None


# --- generators and Bloch vectors ---------------------------------------------

@lru_cache(maxsize=None)
def _gell_mann(d: int) -> tuple:
    sym, asym, diag = [], [], []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1
            sym.append(s)
            a = np.zeros((d, d), dtype=complex)
            a[j, k] = -1j
            a[k, j] = 1j
            asym.append(a)
    for l in range(1, d):
        entries = [1.0] * l + [-float(l)] + [0.0] * (d - l - 1)
        diag.append(np.sqrt(2 / (l * (l + 1))) * np.diag(entries).astype(complex))
    gens = tuple(sym + asym + diag)
    for g in gens:
        g.setflags(write=False)
    return gens


def generator_basis(d: int) -> GeneratorBasis:
    """Generalized Gell-Mann matrices normalised to ``Tr(J_a J_b) = 2 delta_ab``.

    Order: symmetric off-diagonal, antisymmetric off-diagonal, diagonal. For
    ``d = 2`` this is ``(sigma_x, sigma_y, sigma_z)``.
    """
    d = int(d)
    if d < 2:
        raise InputError(f"d must be >= 2, got {d}")
    return GeneratorBasis(d, _gell_mann(d))


def bloch_vector(x, basis: GeneratorBasis) -> np.ndarray:
    """Real coefficients ``v_a = Tr(X J_a)``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (basis.d, basis.d):
        raise DimensionError(f"operator of shape {x.shape} does not match basis d={basis.d}")
    return np.array([np.trace(x @ j).real for j in basis.generators])


def from_bloch_vector(v, basis: GeneratorBasis, trace: float = 1.0) -> np.ndarray:
    """``(trace/d) I + (1/2) sum v_a J_a``."""
    m = trace / basis.d * np.eye(basis.d, dtype=complex)
    for x, j in zip(v, basis.generators):
        m = m + 0.5 * x * j
    return m


# --- random sampling ------------------------------------------------------------

def random_state(rng: np.random.Generator, dims=(2, 2), rank=None) -> DensityMatrix:
    """Hilbert-Schmidt distributed state: ``G G^dagger / Tr`` with Gaussian ``G``."""
    n = dims[0] * dims[1]
    k = n if rank is None else int(rank)
    g = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return DensityMatrix(0.5 * (m + m.conj().T), dims)


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def apply_local_unitaries(rho: DensityMatrix, u_a, u_b) -> DensityMatrix:
    u = np.kron(u_a, u_b)
    m = u @ rho.matrix @ u.conj().T
    return DensityMatrix(0.5 * (m + m.conj().T), rho.dims)
