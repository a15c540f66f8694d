"""Entropies and entanglement quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import matkit
from .errors import DimensionError
from .states import PAULI, DensityMatrix

LN2 = math.log(2.0)

# eigenvalues of rho below this are outside its support
RHO_SUPPORT = 1e-12
# minimum squared overlap of a rho eigenvector with supp(sigma)
OVERLAP_TOL = 1e-9
PPT_TOL = 1e-10


@dataclass(frozen=True)
class EntropyValue:
    """An entropy in nats, with the bits view derived from it."""

    nats: float
    infinite: bool = False

    @property
    def bits(self) -> float:
        return self.nats / LN2

    @classmethod
    def inf(cls) -> "EntropyValue":
        return cls(math.inf, True)

    def to_dict(self) -> dict:
        if self.infinite:
            return {"nats": None, "bits": None, "infinite": True}
        return {"nats": self.nats, "bits": self.bits, "infinite": False}


def _entropy_of_spectrum(lam) -> float:
    lam = lam[lam >= matkit.SUPPORT_CUTOFF]
    return float(-np.sum(lam * np.log(lam)))


def _matrix(x):
    return x.matrix if isinstance(x, DensityMatrix) else np.asarray(x, dtype=complex)


def von_neumann_entropy(rho) -> EntropyValue:
    """``-sum lambda ln lambda`` over the support (``0 ln 0 = 0``)."""
    lam = matkit.hermitian_eig(_matrix(rho)).values
    return EntropyValue(max(_entropy_of_spectrum(lam), 0.0))


def support_contained(rho, sigma) -> bool:
    """True when every support eigenvector of ``rho`` lies in supp(sigma)."""
    er = matkit.hermitian_eig(_matrix(rho))
    es = matkit.hermitian_eig(_matrix(sigma))
    return _support_ok(er, es)


def _support_ok(er, es) -> bool:
    vr = er.vectors[:, er.values > RHO_SUPPORT]
    vs = es.vectors[:, es.values >= matkit.SUPPORT_CUTOFF]
    overlaps = np.sum(np.abs(vs.conj().T @ vr) ** 2, axis=0)
    return bool(np.all(overlaps >= 1 - OVERLAP_TOL))


def relative_entropy(rho: DensityMatrix, sigma: DensityMatrix) -> EntropyValue:
    """``S(rho||sigma) = Tr rho ln rho - Tr rho ln sigma``.

    Infinite (flagged) when supp(rho) is not inside supp(sigma). Logs are
    taken on the supports, so rank-deficient arguments are fine otherwise.
    """
    if rho.dims != sigma.dims:
        raise DimensionError(f"dims differ: {rho.dims} vs {sigma.dims}")
    er = matkit.hermitian_eig(rho.matrix)
    es = matkit.hermitian_eig(sigma.matrix)
    if not _support_ok(er, es):
        return EntropyValue.inf()
    keep = es.values >= matkit.SUPPORT_CUTOFF
    vs = es.vectors[:, keep]
    weights = np.einsum("ij,ik,kj->j", vs.conj(), rho.matrix, vs).real
    cross = float(np.dot(weights, np.log(es.values[keep])))
    value = -_entropy_of_spectrum(er.values) - cross
    return EntropyValue(max(value, 0.0))


_YY = np.kron(PAULI[1], PAULI[1])


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit state.

    The values ``mu_i`` are computed as singular values of ``W^T (Y x Y) W``
    with ``rho = W W^dagger``; they coincide with the square roots of the
    eigenvalues of ``rho (Y x Y) rho* (Y x Y)`` but avoid the square root of
    round-off when ``rho`` is nearly singular.
    """
    if rho.dims != (2, 2):
        raise DimensionError(f"concurrence needs a two-qubit state, got {rho.dims}")
    eig = matkit.hermitian_eig(rho.matrix)
    w = eig.vectors * np.sqrt(np.clip(eig.values, 0, None))
    mu = np.linalg.svd(w.T @ _YY @ w, compute_uv=False)
    return float(max(0.0, mu[0] - mu[1] - mu[2] - mu[3]))


def ppt_check(rho: DensityMatrix, tol: float = PPT_TOL):
    """Return ``(is_ppt, min_eigenvalue)`` of the partial transpose on B."""
    lam = np.linalg.eigvalsh(rho.partial_transpose("B"))
    lam_min = float(lam[0])
    return lam_min >= -tol, lam_min


def octahedron_check(tau):
    """Membership of a diagonal T-vector in ``|t1|+|t2|+|t3| <= 1``; returns ``(inside, margin)``."""
    margin = 1.0 - float(np.sum(np.abs(np.asarray(tau, dtype=float))))
    return margin >= 0, margin


def mutual_information(rho: DensityMatrix) -> EntropyValue:
    s_a = von_neumann_entropy(rho.reduced("A")).nats
    s_b = von_neumann_entropy(rho.reduced("B")).nats
    s = von_neumann_entropy(rho).nats
    return EntropyValue(max(s_a + s_b - s, 0.0))


def closest_uncorrelated(rho: DensityMatrix):
    """Product of the marginals and its relative-entropy distance to ``rho``.

    The distance equals the mutual information; both are evaluated and
    disagreement beyond 1e-10 raises ``ArithmeticError``.
    """
    sigma_u = DensityMatrix(np.kron(rho.reduced("A"), rho.reduced("B")), rho.dims)
    dist = relative_entropy(rho, sigma_u)
    mi = mutual_information(rho)
    if dist.infinite or abs(dist.nats - mi.nats) > 1e-10:
        raise ArithmeticError(f"relative entropy {dist.nats} disagrees with mutual information {mi.nats}")
    return sigma_u, dist
