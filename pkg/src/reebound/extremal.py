"""Stationarity conditions for the closest separable (or PPT) state.

A minimiser ``sigma`` of ``S(rho||sigma)`` over a set that is closed under
local filtering and local unitaries must be stationary along both families
of curves. To first order this gives, for each party ``X``:

* filtering:  ``sigma_X = rho_X + (rho o g)_X``;
* unitaries:  ``([rho, ln sigma])_X = 0``;

where ``g`` is the kernel built by :func:`compute_g` in the eigenbasis of
``sigma``. Everything here works for arbitrary ``dA x dB``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from . import matkit
from .errors import InputError, SingularityError, SupportError
from .measures import relative_entropy, support_contained
from .states import DensityMatrix, bloch_vector, generator_basis, to_hilbert_schmidt

DEGENERACY_RTOL = 1e-12
CONDITION_TOL = 1e-6
CATEGORY_TOL = 1e-9
RHO_WEIGHT = 1e-12
SCAN_STEP = 1e-4


def g_entry(a: float, b: float) -> float:
    """One entry of the g-kernel for eigenvalues ``a, b > 0``.

    ``((a+b)/2) (ln a - ln b)/(a - b) - 1`` is the ratio of the arithmetic to
    the logarithmic mean minus one. With ``x = |a-b|/(a+b)`` it equals
    ``atanh(x)/x - 1``, which is evaluated directly (series for small x).
    Returns 0 on the degenerate branch ``|a-b| <= 1e-12 max(a, b)`` and when
    either argument is not positive.
    """
    if a <= 0.0 or b <= 0.0:
        return 0.0
    diff = abs(a - b)
    if diff <= DEGENERACY_RTOL * max(a, b):
        return 0.0
    x = diff / (a + b)
    if x < 1e-4:
        x2 = x * x
        return x2 / 3 + x2 * x2 / 5
    return math.atanh(x) / x - 1.0


@dataclass(frozen=True)
class GMatrix:
    """g-kernel of ``sigma`` together with the eigenbasis it is expressed in.

    ``support_mask[i]`` is False for null-space eigenvectors of ``sigma``;
    any entry touching such an index is stored as 0.
    """

    entries: np.ndarray
    basis: matkit.EigDecomposition
    support_mask: np.ndarray


def _g_from_eig(eig: matkit.EigDecomposition) -> GMatrix:
    lam = eig.values
    mask = lam >= matkit.SUPPORT_CUTOFF
    n = lam.size
    g = np.zeros((n, n))
    for i in range(n):
        if not mask[i]:
            continue
        for j in range(i + 1, n):
            if mask[j]:
                g[i, j] = g[j, i] = g_entry(lam[i], lam[j])
    return GMatrix(g, eig, mask)


def _check_pair(rho: DensityMatrix, sigma: DensityMatrix):
    if rho.dims != sigma.dims:
        raise InputError(f"dims differ: {rho.dims} vs {sigma.dims}")
    if not support_contained(rho.matrix, sigma.matrix):
        raise SupportError("supp(rho) is not contained in supp(sigma)")


def compute_g(rho: DensityMatrix, sigma: DensityMatrix) -> GMatrix:
    _check_pair(rho, sigma)
    return _g_from_eig(matkit.hermitian_eig(sigma.matrix))


def rho_hadamard_g(rho: DensityMatrix, gm: GMatrix) -> np.ndarray:
    """``rho o g`` formed in sigma's eigenbasis and rotated back."""
    v = gm.basis.vectors
    local = v.conj().T @ rho.matrix @ v
    return v @ matkit.hadamard_product(local, gm.entries) @ v.conj().T


def _log_on_support(eig: matkit.EigDecomposition) -> np.ndarray:
    lam = eig.values
    logs = np.zeros_like(lam)
    keep = lam >= matkit.SUPPORT_CUTOFF
    logs[keep] = np.log(lam[keep])
    return logs


@dataclass(frozen=True)
class ConditionReport:
    """Residuals of the filtering and unitary conditions for one party.

    Vectors use the generator basis of that party: ``s`` for ``sigma_X``,
    ``r`` for ``rho_X``, ``g_vec`` for ``(rho o g)_X`` and ``h_vec`` for the
    anti-Hermitian ``([rho, ln sigma])_X = (i/2) h.J``.
    """

    party: str
    s: np.ndarray
    r: np.ndarray
    g_vec: np.ndarray
    h_vec: np.ndarray
    filter_residual: float
    unitary_residual: float
    tol: float = CONDITION_TOL

    @property
    def filter_satisfied(self) -> bool:
        return self.filter_residual <= self.tol

    @property
    def unitary_satisfied(self) -> bool:
        return self.unitary_residual <= self.tol

    @property
    def satisfied(self) -> dict:
        return {"filter": self.filter_satisfied, "unitary": self.unitary_satisfied}

    def to_dict(self) -> dict:
        return {
            "party": self.party,
            "s": self.s.tolist(),
            "r": self.r.tolist(),
            "g_vec": self.g_vec.tolist(),
            "h_vec": self.h_vec.tolist(),
            "filter_residual": float(self.filter_residual),
            "unitary_residual": float(self.unitary_residual),
            "satisfied": self.satisfied,
            "tol": self.tol,
        }


def _condition_report(rho, sigma, party, tol) -> ConditionReport:
    if party not in ("A", "B"):
        raise InputError(f"party must be 'A' or 'B', got {party!r}")
    gm = compute_g(rho, sigma)
    dims = rho.dims
    d = dims[0] if party == "A" else dims[1]
    basis = generator_basis(d)

    sig_x = sigma.reduced(party)
    rho_x = rho.reduced(party)
    rg_x = matkit.reduce_to(rho_hadamard_g(rho, gm), dims, party)
    filt = sig_x - rho_x - rg_x

    v = gm.basis.vectors
    log_sigma = (v * _log_on_support(gm.basis)) @ v.conj().T
    comm_x = matkit.reduce_to(matkit.commutator(rho.matrix, log_sigma), dims, party)

    h_vec = np.array([(-1j * np.trace(comm_x @ j)).real for j in basis.generators])
    return ConditionReport(
        party=party,
        s=bloch_vector(sig_x, basis),
        r=bloch_vector(rho_x, basis),
        g_vec=bloch_vector(rg_x, basis),
        h_vec=h_vec,
        filter_residual=float(np.linalg.norm(filt)),
        unitary_residual=float(np.linalg.norm(comm_x)),
        tol=tol,
    )


def filter_residual(rho: DensityMatrix, sigma: DensityMatrix, party: str = "B",
                    tol: float = CONDITION_TOL) -> ConditionReport:
    """Report for the local-filtering condition on ``party``.

    ``filter_residual`` is the Frobenius norm of
    ``sigma_X - rho_X - (rho o g)_X``; it vanishes at any minimiser (necessary,
    not sufficient). The unitary fields are filled in as well.
    """
    return _condition_report(rho, sigma, party, tol)


def unitary_residual(rho: DensityMatrix, sigma: DensityMatrix, party: str = "B",
                     tol: float = CONDITION_TOL) -> ConditionReport:
    """Report for the local-unitary condition ``([rho, ln sigma])_X = 0``."""
    return _condition_report(rho, sigma, party, tol)


def unitary_linear_terms(rho: DensityMatrix, sigma: DensityMatrix, party: str = "B") -> np.ndarray:
    """Matrix-element form ``sum_ij <i|N|j><j|rho|i>(ln l_j - ln l_i)`` per generator ``N``.

    Equals ``-Tr(N [rho, ln sigma]) = -i h_a`` for ``N = J_a`` lifted to the
    party; used as a cross-check of :func:`unitary_residual`.
    """
    _check_pair(rho, sigma)
    eig = matkit.hermitian_eig(sigma.matrix)
    v = eig.vectors
    logs = _log_on_support(eig)
    rho_l = v.conj().T @ rho.matrix @ v
    diff = logs[None, :] - logs[:, None]  # [i, j] -> ln l_j - ln l_i
    d = rho.dims[0] if party == "A" else rho.dims[1]
    out = []
    for j in generator_basis(d).generators:
        n_l = v.conj().T @ matkit.embed(j, rho.dims, party) @ v
        out.append(np.sum(n_l * rho_l.T * diff))
    return np.array(out)


# --- weak constraints -------------------------------------------------------

@dataclass(frozen=True)
class WeakConstraintReport:
    reduction_A: float
    reduction_B: float
    commutator_A: float
    commutator_B: float
    tau_t: np.ndarray | None
    equation_count: int

    def to_dict(self) -> dict:
        return {
            "reduction_A": self.reduction_A,
            "reduction_B": self.reduction_B,
            "commutator_A": self.commutator_A,
            "commutator_B": self.commutator_B,
            "tau_t": None if self.tau_t is None else self.tau_t.tolist(),
            "equation_count": self.equation_count,
        }


def tau_t_residuals(t_diag, tau) -> np.ndarray:
    """Residuals of ``t_ii tau_ij - t_jj tau_ji`` and ``tau_ij t_jj - tau_ji t_ii``.

    Ordered as pairs (1,2), (1,3), (2,3), two equations each. The first
    equation of each pair is the B-reduction of ``[rho, sigma]``, the second
    the A-reduction, for a canonical ``rho`` with diagonal ``t``.
    """
    t = np.asarray(t_diag, dtype=float)
    tau = np.asarray(tau, dtype=float)
    out = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        out.append(t[i] * tau[i, j] - t[j] * tau[j, i])
        out.append(tau[i, j] * t[j] - tau[j, i] * t[i])
    return np.array(out)


def weak_constraint_residual(rho: DensityMatrix, sigma: DensityMatrix,
                             check_tau_t: bool = True) -> WeakConstraintReport:
    """Residuals of the reduction-matching and commutator-reduction constraints.

    The tau/t equations need ``rho`` in canonical form (diagonal T within
    1e-8); with ``check_tau_t`` a non-canonical ``rho`` raises InputError,
    otherwise ``tau_t`` is left as None. ``equation_count`` records that the
    filtering plus unitary conditions amount to ``4(d^2 - 1)`` scalar
    equations in ``d x d``.
    """
    if rho.dims != sigma.dims:
        raise InputError(f"dims differ: {rho.dims} vs {sigma.dims}")
    red = {x: float(np.linalg.norm(sigma.reduced(x) - rho.reduced(x))) for x in "AB"}
    comm = matkit.commutator(rho.matrix, sigma.matrix)
    com = {x: float(np.linalg.norm(matkit.reduce_to(comm, rho.dims, x))) for x in "AB"}
    tau_t = None
    if rho.dims == (2, 2):
        t_rho = to_hilbert_schmidt(rho).T
        off = np.max(np.abs(t_rho - np.diag(np.diag(t_rho))))
        if off <= 1e-8:
            tau_t = tau_t_residuals(np.diag(t_rho), to_hilbert_schmidt(sigma).T)
        elif check_tau_t:
            raise InputError(f"rho is not in canonical form (off-diagonal T up to {off:.3g})")
    d = rho.dims[0]
    return WeakConstraintReport(red["A"], red["B"], com["A"], com["B"], tau_t, 4 * (d * d - 1))


# --- categories --------------------------------------------------------------

CATEGORIES = ("category_i", "category_ii", "constraint_only", "none")


def _reduction_norm(op, dims):
    return max(np.linalg.norm(matkit.reduce_to(op, dims, x)) for x in "AB")


def category_classify(rho: DensityMatrix, sigma: DensityMatrix, tol: float = CATEGORY_TOL) -> str:
    """Classify how ``(rho, sigma)`` makes ``(rho o g)_X`` vanish.

    ``category_i``: ``[rho, sigma] = 0``. ``category_ii``: the eigenpair
    constraint holds and, for eigenvectors of ``sigma`` carrying weight of
    ``rho`` and belonging to different eigenvalues, both reductions of
    ``|j><i|`` vanish. ``constraint_only``: the eigenpair constraint
    ``(|j><j|[rho, sigma]|i><i|)_X = 0`` holds for every ``i, j`` but neither
    category applies. ``none`` otherwise. The result is descriptive; nothing
    is asserted about minimality.
    """
    _check_pair(rho, sigma)
    dims = rho.dims
    if np.linalg.norm(matkit.commutator(rho.matrix, sigma.matrix)) <= tol:
        return "category_i"
    eig = matkit.hermitian_eig(sigma.matrix)
    lam, v = eig.values, eig.vectors
    rho_l = v.conj().T @ rho.matrix @ v
    n = lam.size
    constraint = True
    structural = True
    weight = np.diag(rho_l).real
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            degenerate = abs(lam[i] - lam[j]) <= DEGENERACY_RTOL * max(abs(lam[i]), abs(lam[j]), 1e-300)
            outer = np.outer(v[:, j], v[:, i].conj())
            term = (lam[i] - lam[j]) * rho_l[j, i] * outer
            if _reduction_norm(term, dims) > tol:
                constraint = False
            if (not degenerate and weight[i] > RHO_WEIGHT and weight[j] > RHO_WEIGHT
                    and _reduction_norm(outer, dims) > tol):
                structural = False
    if not constraint:
        return "none"
    return "category_ii" if structural else "constraint_only"



# --- direct verification -------------------------------------------------------

@dataclass(frozen=True)
class ScanResult:
    t_grid: np.ndarray
    values: np.ndarray
    derivative: float
    predicted: float

    @property
    def mismatch(self) -> float:
        return abs(self.derivative - self.predicted)


def _direction_operator(n, d) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    basis = generator_basis(d)
    if n.shape != (len(basis),):
        raise InputError(f"direction must have {len(basis)} components for d={d}")
    norm = np.linalg.norm(n)
    if abs(norm - 1) > 1e-10:
        raise InputError(f"direction must be a unit vector, |n| = {norm}")
    return sum(x * j for x, j in zip(n, basis.generators))


def filtered_state(sigma: DensityMatrix, party: str, n, t: float) -> DensityMatrix:
    """``F sigma F / Tr(F sigma F)`` with ``F = exp(t n.J/2)`` on ``party``."""
    d = sigma.dims[0] if party == "A" else sigma.dims[1]
    f = matkit.embed(expm(0.5 * t * _direction_operator(n, d)), sigma.dims, party)
    m = f @ sigma.matrix @ f.conj().T
    m = m / np.trace(m).real
    return DensityMatrix(0.5 * (m + m.conj().T), sigma.dims)


def filter_perturbation_scan(rho: DensityMatrix, sigma: DensityMatrix, party: str, n,
                             t_grid=(), step: float = SCAN_STEP) -> ScanResult:
    """Evaluate ``S(rho||sigma'(t))`` along a local-filtering curve.

    The central difference at ``t = 0`` (step ``step``) is returned with the
    first-order prediction ``n.(s - r - g_vec)`` from :func:`filter_residual`.

    Raises
    ------
    SupportError
        If filtering pushes supp(rho) out of supp(sigma'(t)) at some ``t``.
    """
    def value(t):
        s = relative_entropy(rho, filtered_state(sigma, party, n, t))
        if s.infinite:
            raise SupportError(f"supp(rho) leaves supp(sigma'(t)) at t={t!r}", t=t)
        return s.nats

    t_grid = np.asarray(t_grid, dtype=float)
    values = np.array([value(t) for t in t_grid])
    deriv = (value(step) - value(-step)) / (2 * step)
    rep = filter_residual(rho, sigma, party)
    predicted = float(np.dot(n, rep.s - rep.r - rep.g_vec))
    return ScanResult(t_grid, values, float(deriv), predicted)


def bures_residual(rho: DensityMatrix, sigma: DensityMatrix, party: str, n) -> float:
    """LHS - RHS of the filtering stationarity equation for the Bures distance.

    LHS is ``(n.s_X) Tr(sqrt(sigma) rho sqrt(sigma))``; RHS is the resolvent
    integral, evaluated in sigma's eigenbasis with
    ``(1/pi) int_0^inf sqrt(x)/((a+x)(b+x)) dx = 1/(sqrt(a) + sqrt(b))``.
    """
    eig = matkit.hermitian_eig(sigma.matrix)
    lam, v = eig.values, eig.vectors
    if lam[-1] <= 1e-12:
        raise SingularityError(f"sigma must be strictly positive (min eigenvalue {lam[-1]:.3g})")
    d = sigma.dims[0] if party == "A" else sigma.dims[1]
    n_op = matkit.embed(_direction_operator(n, d), sigma.dims, party)
    root = np.sqrt(lam)
    sqrt_sigma = (v * root) @ v.conj().T
    s_vec = bloch_vector(sigma.reduced(party), generator_basis(d))
    lhs = float(np.dot(n, s_vec)) * np.trace(sqrt_sigma @ rho.matrix @ sqrt_sigma).real
    n_l = v.conj().T @ n_op @ v
    anti = v.conj().T @ (rho.matrix @ sqrt_sigma + sqrt_sigma @ rho.matrix) @ v
    kernel = 0.5 * (lam[:, None] + lam[None, :]) / (root[:, None] + root[None, :])
    rhs = np.sum(kernel * n_l * anti.T).real
    return float(lhs - rhs)
