"""Upper bound on the relative entropy of entanglement for two qubits.

:func:`upper_bound_ree` restricts the candidate state to the same Bloch
vectors as the (canonicalised) input and a diagonal T-matrix ``tau``, which
leaves a three-parameter search over the PSD and PPT region. The
closest-PPT oracle :func:`closest_ppt_oracle` searches all density matrices
instead and serves as an independent check of the bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import matkit
from .errors import InputError, SupportError
from .extremal import ConditionReport, filter_residual
from .measures import EntropyValue, von_neumann_entropy, relative_entropy
from .states import (
    DensityMatrix,
    HilbertSchmidtForm,
    PAULI,
    canonical_form,
    from_hilbert_schmidt,
    hs_matrix,
    make_family,
    rotate_hs,
    to_hilbert_schmidt,
)

FEASIBILITY_TOL = 1e-12
EIG_FLOOR = 1e-12
OCTAHEDRON_SCALE = 0.999
ZERO_VALUE = 1e-13


@dataclass(frozen=True)
class BoundOptions:
    max_iter: int = 2000
    xtol: float = 1e-9
    initial_step: float = 0.05
    restarts: int = 2
    conditions: bool = True
    threads: int = 1


@dataclass(frozen=True)
class BoundResult:
    tau_star: np.ndarray
    sigma_star: DensityMatrix
    value: EntropyValue
    rotations: tuple
    diagnostics: dict
    conditions: tuple[ConditionReport, ConditionReport] | None = None


@dataclass(frozen=True)
class OracleResult:
    sigma_star: DensityMatrix
    value: EntropyValue
    starts: int
    per_start_values: list
    seed: int
    diagnostics: dict = field(default_factory=dict)


# --- Nelder-Mead ----------------------------------------------------------------

@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int
    diameter: float
    converged: bool


def nelder_mead(fun, x0, step=0.05, xtol=1e-9, max_iter=2000, simplex=None) -> SimplexResult:
    """Plain Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).

    ``fun`` may return ``inf`` for infeasible points. Stops when the largest
    distance from the best vertex is at most ``xtol`` or after ``max_iter``
    iterations.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if simplex is None:
        simplex = [x0] + [x0 + step * e for e in np.eye(n)]
    pts = np.array(simplex, dtype=float)
    vals = np.array([fun(p) for p in pts])
    it = 0
    diameter = math.inf
    while True:
        order = np.argsort(vals, kind="stable")
        pts, vals = pts[order], vals[order]
        diameter = float(np.max(np.linalg.norm(pts[1:] - pts[0], axis=1)))
        if diameter <= xtol or it >= max_iter:
            break
        it += 1
        centroid = pts[:-1].mean(axis=0)
        xr = centroid + (centroid - pts[-1])
        fr = fun(xr)
        if vals[0] <= fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[0]:
            xe = centroid + 2.0 * (centroid - pts[-1])
            fe = fun(xe)
            if fe < fr:
                pts[-1], vals[-1] = xe, fe
            else:
                pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = fun(xc)
            if fc <= fr:
                pts[-1], vals[-1] = xc, fc
                continue
        else:
            xc = centroid + 0.5 * (pts[-1] - centroid)
            fc = fun(xc)
            if fc < vals[-1]:
                pts[-1], vals[-1] = xc, fc
                continue
        pts[1:] = pts[0] + 0.5 * (pts[1:] - pts[0])
        vals[1:] = [fun(p) for p in pts[1:]]
    return SimplexResult(pts[0].copy(), float(vals[0]), it, diameter, diameter <= xtol)


# --- constrained three-parameter search ------------------------------------------

class _TauProblem:
    """Objective over diagonal ``tau`` for a canonical two-qubit ``rho``."""

    def __init__(self, rho_c: DensityMatrix, h: HilbertSchmidtForm):
        self.rho = rho_c.matrix
        self.h = h
        self.base = hs_matrix(h.rA, h.rB, np.zeros((3, 3)))
        self.terms = [0.25 * np.kron(p, p) for p in PAULI]
        self.base_pt = matkit.partial_transpose(self.base, (2, 2), "B")
        self.terms_pt = [matkit.partial_transpose(t, (2, 2), "B") for t in self.terms]
        self.entropy = von_neumann_entropy(rho_c).nats

    def sigma(self, tau) -> np.ndarray:
        return self.base + tau[0] * self.terms[0] + tau[1] * self.terms[1] + tau[2] * self.terms[2]

    def sigma_pt(self, tau) -> np.ndarray:
        return self.base_pt + tau[0] * self.terms_pt[0] + tau[1] * self.terms_pt[1] + tau[2] * self.terms_pt[2]

    def margin(self, tau) -> float:
        """Smallest eigenvalue of sigma and of its partial transpose."""
        return min(np.linalg.eigvalsh(self.sigma(tau))[0], np.linalg.eigvalsh(self.sigma_pt(tau))[0])

    def feasible(self, tau) -> bool:
        return self.margin(tau) >= -FEASIBILITY_TOL

    def _relent(self, lam, vec) -> float:
        weights = np.einsum("ij,ik,kj->j", vec.conj(), self.rho, vec).real
        return float(-np.dot(weights, np.log(np.maximum(lam, EIG_FLOOR))) - self.entropy)

    def __call__(self, tau) -> float:
        lam, vec = np.linalg.eigh(self.sigma(tau))
        if lam[0] < -FEASIBILITY_TOL or np.linalg.eigvalsh(self.sigma_pt(tau))[0] < -FEASIBILITY_TOL:
            return math.inf
        return self._relent(lam, vec)

    def barrier(self, tau, mu) -> float:
        lam, vec = np.linalg.eigh(self.sigma(tau))
        lam_pt = np.linalg.eigvalsh(self.sigma_pt(tau))
        if lam[0] <= 0 or lam_pt[0] <= 0:
            return math.inf
        return self._relent(lam, vec) - mu * (np.sum(np.log(lam)) + np.sum(np.log(lam_pt)))

    def interior_point(self) -> tuple[np.ndarray, float]:
        """Point maximising :meth:`margin` (a concave function of tau)."""
        best = None
        for x0 in (np.zeros(3), np.diag(self.h.T)):
            res = nelder_mead(lambda t: -self.margin(t), x0, step=0.1, xtol=1e-10, max_iter=1000)
            if best is None or res.fun < best.fun:
                best = res
        return best.x, -best.fun

    def pull_inside(self, tau, center) -> np.ndarray:
        """Point closest to ``tau`` on the segment from ``center`` that is feasible."""
        tau = np.asarray(tau, dtype=float)
        if self.feasible(tau):
            return tau
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if self.feasible(center + mid * (tau - center)):
                lo = mid
            else:
                hi = mid
        return center + lo * (tau - center)

    def start_simplex(self, x0, step, center) -> list:
        pts = [x0]
        inward = center - x0
        for e in np.eye(3):
            direction = np.sign(inward @ e) or 1.0
            s = step
            for _ in range(40):
                cand = x0 + s * direction * e
                if self.feasible(cand):
                    break
                cand = x0 - s * direction * e
                if self.feasible(cand):
                    break
                s *= 0.5
            pts.append(cand)
        return pts


def _starts(problem: _TauProblem, center) -> list:
    raw = [np.zeros(3), np.diag(problem.h.T)]
    for k in range(3):
        for sgn in (1.0, -1.0):
            v = np.zeros(3)
            v[k] = sgn * OCTAHEDRON_SCALE
            raw.append(v)
    return [problem.pull_inside(x, center) for x in raw]


def _run_start(problem, x0, center, opts: BoundOptions) -> tuple[SimplexResult, int]:
    total = 0
    res = nelder_mead(problem, x0, xtol=opts.xtol, max_iter=opts.max_iter,
                      simplex=problem.start_simplex(x0, opts.initial_step, center))
    total += res.iterations
    for _ in range(opts.restarts):
        budget = opts.max_iter - total
        if budget <= 0:
            break
        again = nelder_mead(problem, res.x, xtol=opts.xtol, max_iter=budget,
                            simplex=problem.start_simplex(res.x, opts.initial_step * 0.1, center))
        total += again.iterations
        improved = again.fun < res.fun - 1e-14
        if again.fun <= res.fun:
            res = again
        if not improved:
            break
    return res, total


BARRIER_SCHEDULE = (1e-4, 1e-6, 1e-8, 1e-10, 1e-12)


def _barrier_polish(problem: _TauProblem, x, center, slack, opts: BoundOptions):
    """Follow the log-barrier path from near ``x``; returns ``(tau, value, iterations)``.

    Simplex descent stalls in the narrow corners of the feasible region where
    rank-deficient minimisers live; the barrier objective is smooth there.
    """
    if slack <= 1e-10:
        return x, problem(x), 0
    y = x + 1e-3 * (center - x)
    iters = 0
    for mu in BARRIER_SCHEDULE:
        res = nelder_mead(lambda t: problem.barrier(t, mu), y, step=max(10 * mu, 1e-6) ** 0.5 * 0.1,
                          xtol=max(opts.xtol, mu), max_iter=opts.max_iter // 4)
        iters += res.iterations
        if math.isfinite(res.fun):
            y = res.x
    return y, problem(y), iters


def upper_bound_ree(rho: DensityMatrix, options: BoundOptions | None = None) -> BoundResult:
    """Constrained minimum of ``S(rho||sigma)`` over the three-parameter family.

    The state is brought to canonical form; candidates share its Bloch vectors
    and have T-matrix ``diag(tau)``; feasibility is exact two-qubit
    separability (PSD and PPT). The minimiser is rotated back to the frame of
    ``rho``. Non-convergence is reported in ``diagnostics`` rather than raised.
    """
    opts = options or BoundOptions()
    if rho.dims != (2, 2):
        raise InputError(f"the bound is defined for two qubits, got dims {rho.dims}")
    rho_c, (o_a, o_b) = canonical_form(rho)
    h = to_hilbert_schmidt(rho_c)
    problem = _TauProblem(rho_c, h)
    center, slack = problem.interior_point()
    starts = _starts(problem, center)
    # S >= 0, so a start that already reaches zero (rho itself feasible) is optimal
    zero = next((k for k, x in enumerate(starts) if problem(x) <= ZERO_VALUE), None)
    if zero is not None:
        x = starts[zero]
        runs = [(SimplexResult(x, problem(x), 0, 0.0, True), 0)]
        best, polish_iters = 0, 0
        res, iters = runs[0]
        tau = x
    else:
        if opts.threads > 1:
            with ThreadPoolExecutor(opts.threads) as pool:
                runs = list(pool.map(lambda x: _run_start(problem, x, center, opts), starts))
        else:
            runs = [_run_start(problem, x, center, opts) for x in starts]
        best = min(range(len(runs)), key=lambda k: (runs[k][0].fun, k))
        res, iters = runs[best]
        tau = res.x
        polished, polished_value, polish_iters = _barrier_polish(problem, tau, center, slack, opts)
        if polished_value < res.fun:
            tau = polished

    canonical_sigma = HilbertSchmidtForm(h.rA, h.rB, np.diag(tau))
    back = rotate_hs(canonical_sigma, o_a.T, o_b.T)
    sigma = from_hilbert_schmidt(back)
    value = relative_entropy(rho, sigma)

    conditions = None
    if opts.conditions:
        try:
            conditions = (filter_residual(rho, sigma, "A"), filter_residual(rho, sigma, "B"))
        except SupportError:
            conditions = None
    diagnostics = {
        "starts": len(runs),
        "best_start": best,
        "iterations": iters,
        "simplex_size": res.diameter,
        "converged": bool(res.converged),
        "polish_iterations": polish_iters,
        "interior_margin": float(slack),
        "per_start_values": [r.fun for r, _ in runs],
    }
    return BoundResult(tau, sigma, value, (o_a, o_b), diagnostics, conditions)


# --- brute-force closest-PPT oracle ------------------------------------------------

PENALTY_SCHEDULE = (10.0, 1e3, 1e5)
ORACLE_STAGE_ITERS = 400
ORACLE_STARTS = 32


class _OracleProblem:
    """Penalised relative entropy over ``sigma = G G^dagger / Tr``, G lower triangular."""

    def __init__(self, rho: DensityMatrix):
        self.rho = rho.matrix
        self.dims = rho.dims
        self.n = rho.size
        self.entropy = von_neumann_entropy(rho).nats
        self.rows, self.cols = np.tril_indices(self.n, -1)
        self.nparams = self.n + 2 * self.rows.size

    def unpack(self, x) -> np.ndarray:
        n = self.n
        g = np.diag(x[:n].astype(complex))
        k = self.rows.size
        g[self.rows, self.cols] = x[n:n + k] + 1j * x[n + k:]
        return g

    def sigma(self, x) -> np.ndarray:
        g = self.unpack(x)
        m = g @ g.conj().T
        return m / np.trace(m).real

    def value_and_grad(self, x, mu):
        n = self.n
        g = self.unpack(x)
        m = g @ g.conj().T
        tr = np.trace(m).real
        sigma = m / tr
        lam, v = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
        lam = np.maximum(lam, 1e-15)
        rho_l = v.conj().T @ self.rho @ v
        obj = -float(np.dot(np.diag(rho_l).real, np.log(lam))) - self.entropy

        # Frechet derivative of -Tr rho log(sigma) in sigma's eigenbasis
        a, b = lam[:, None], lam[None, :]
        x_rel = (a - b) / (a + b)
        small = np.abs(x_rel) < 1e-4
        safe = np.where(small, 0.5, x_rel)
        ratio = np.where(small, 1 + x_rel ** 2 / 3 + x_rel ** 4 / 5, np.arctanh(safe) / safe)
        div = 2 * ratio / (a + b)
        d_sigma = -(v @ (div * rho_l) @ v.conj().T)

        pt = matkit.partial_transpose(sigma, self.dims, "B")
        plam, pvec = np.linalg.eigh(pt)
        viol = max(0.0, -plam[0])
        if viol > 0:
            obj += mu * viol * viol
            w = pvec[:, 0]
            d_sigma = d_sigma - 2 * mu * viol * matkit.partial_transpose(np.outer(w, w.conj()), self.dims, "B")

        e = (d_sigma - np.trace(d_sigma @ sigma).real * np.eye(n)) / tr
        eg = 2 * (e @ g)
        grad = np.concatenate([
            eg.real[np.arange(n), np.arange(n)],
            eg.real[self.rows, self.cols],
            eg.imag[self.rows, self.cols],
        ])
        return obj, grad


def _repair_ppt(sigma: np.ndarray, dims) -> np.ndarray:
    """Mix with the maximally mixed state just enough to make the partial transpose PSD."""
    n = sigma.shape[0]
    sigma = 0.5 * (sigma + sigma.conj().T)
    lam = np.linalg.eigvalsh(matkit.partial_transpose(sigma, dims, "B"))[0]
    if lam >= 0:
        return sigma
    eps = min(1.0, -lam / (1.0 / n - lam) * (1 + 1e-9) + 1e-15)
    return (1 - eps) * sigma + eps * np.eye(n) / n


def _oracle_start(problem: _OracleProblem, x0):
    x = x0
    iters = 0
    for mu in PENALTY_SCHEDULE:
        res = minimize(problem.value_and_grad, x, args=(mu,), jac=True, method="L-BFGS-B",
                       options={"maxiter": ORACLE_STAGE_ITERS, "gtol": 1e-12, "ftol": 1e-15})
        x = res.x
        iters += int(res.nit)
    sigma = DensityMatrix(_repair_ppt(problem.sigma(x), problem.dims), problem.dims)
    return sigma, iters


def closest_ppt_oracle(rho: DensityMatrix, starts: int = ORACLE_STARTS, seed: int = 0,
                       threads: int = 1) -> OracleResult:
    """Multi-start penalised minimisation of ``S(rho||sigma)`` over PPT states.

    Each start draws a Gaussian ``G``; the PPT violation is penalised by
    ``mu * max(0, -lambda_min(sigma^T_B))^2`` with ``mu`` stepping through
    ``PENALTY_SCHEDULE`` (L-BFGS with analytic gradients per stage). The
    final iterate is mixed with the maximally mixed state to remove any
    remaining violation. The best start wins; ties go to the lower index.
    """
    starts = int(starts)
    if starts < 1:
        raise InputError(f"starts must be >= 1, got {starts}")
    problem = _OracleProblem(rho)
    rng = np.random.default_rng(seed)
    x0s = [rng.standard_normal(problem.nparams) for _ in range(starts)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            runs = list(pool.map(lambda x: _oracle_start(problem, x), x0s))
    else:
        runs = [_oracle_start(problem, x) for x in x0s]
    values = [relative_entropy(rho, s) for s, _ in runs]
    per_start = [v.nats for v in values]
    best = min(range(starts), key=lambda k: (per_start[k], k))
    sigma = runs[best][0]
    min_pt = float(np.linalg.eigvalsh(sigma.partial_transpose("B"))[0])
    diagnostics = {"best_start": best, "iterations": [it for _, it in runs], "min_pt_eigenvalue": min_pt}
    return OracleResult(sigma, values[best], starts, per_start, int(seed), diagnostics)


# --- sweeps --------------------------------------------------------------------

def _sweep_state(family: str, param: str, x: float) -> DensityMatrix:
    if family == "pure" and param == "p":
        return make_family("pure", p=x)
    if family == "werner" and param == "F":
        return make_family("werner", F=x)
    if family == "bell_diagonal" and param == "lambda1":
        return make_family("bell_diagonal", lambdas=(x, 1 - x, 0.0, 0.0))
    if family == "isotropic" and param == "F":
        return make_family("isotropic", d=2, F=x)
    raise InputError(f"cannot sweep parameter {param!r} of family {family!r}")


SWEEPABLE = {"pure": "p", "werner": "F", "bell_diagonal": "lambda1", "isotropic": "F"}


def sweep(family: str, param: str, start: float, stop: float, steps: int,
          with_oracle: bool = False, oracle_starts: int = 8, seed: int = 0,
          options: BoundOptions | None = None) -> list[dict]:
    """Bound (and optionally oracle) along a one-parameter family.

    Rows carry the parameter, the bound in nats and bits, the oracle value
    when requested and the filtering/unitary residuals at the bound's
    minimiser (NaN when the minimiser does not contain supp(rho)).
    """
    steps = int(steps)
    if steps < 2:
        raise InputError(f"steps must be >= 2, got {steps}")
    _sweep_state(family, param, start)  # validates the pair early
    rows = []
    for x in np.linspace(start, stop, steps):
        x = float(x)
        rho = _sweep_state(family, param, x)
        res = upper_bound_ree(rho, options)
        row = {"param": x, "bound_nats": res.value.nats, "bound_bits": res.value.bits}
        if with_oracle:
            row["oracle_nats"] = closest_ppt_oracle(rho, oracle_starts, seed).value.nats
        if res.conditions is None:
            nan = float("nan")
            row.update(filter_residual_A=nan, filter_residual_B=nan, unitary_residual_A=nan, unitary_residual_B=nan)
        else:
            ca, cb = res.conditions
            row.update(
                filter_residual_A=ca.filter_residual,
                filter_residual_B=cb.filter_residual,
                unitary_residual_A=ca.unitary_residual,
                unitary_residual_B=cb.unitary_residual,
            )
        rows.append(row)
    return rows
