import math

import numpy as np
import pytest

from reebound import boundopt, measures, states
from reebound.errors import InputError


def _h(p):
    return -sum(x * math.log(x) for x in (p, 1 - p) if x > 0)


def _check_bound_invariants(rho, res):
    ok, lam = measures.ppt_check(res.sigma_star)
    assert lam >= -1e-9
    assert res.sigma_star.eigenvalues()[-1] >= -1e-9
    for party in "AB":
        np.testing.assert_allclose(res.sigma_star.reduced(party), rho.reduced(party), atol=1e-8)
    assert res.value.nats >= 0
    assert res.value.nats == pytest.approx(measures.relative_entropy(rho, res.sigma_star).nats, abs=1e-10)


def test_nelder_mead_quadratic():
    res = boundopt.nelder_mead(lambda x: float(np.sum((x - [0.3, -0.2, 0.1]) ** 2)), np.zeros(3), xtol=1e-10)
    np.testing.assert_allclose(res.x, [0.3, -0.2, 0.1], atol=1e-8)


def test_nelder_mead_rejects_infeasible():
    fun = lambda x: math.inf if x[0] < 0.5 else float((x[0] - 0.2) ** 2 + x[1] ** 2)
    res = boundopt.nelder_mead(fun, np.array([1.0, 0.3]), step=0.1)
    assert res.x[0] >= 0.5 and res.fun == pytest.approx(0.09, abs=1e-6)


def test_bound_product_state():
    rho = states.product(states.qubit([0.1, 0.2, 0.3]), states.qubit([0, -0.4, 0.2]))
    res = boundopt.upper_bound_ree(rho)
    assert res.value.nats <= 1e-9
    _check_bound_invariants(rho, res)
    can, _ = states.canonical_form(rho)
    np.testing.assert_allclose(res.tau_star, np.diag(states.to_hilbert_schmidt(can).T), atol=1e-6)


def test_bound_pure_half():
    rho = states.pure(0.5)
    res = boundopt.upper_bound_ree(rho)
    assert res.value.bits == pytest.approx(1.0, abs=1e-4)
    _check_bound_invariants(rho, res)
    # at p = 1/2 the minimiser is a face of PPT states with <Phi+|sigma|Phi+> = 1/2;
    # diag(1/2, 0, 0, 1/2) is one of them
    phi = states.BELL_BASIS[0]
    assert np.vdot(phi, res.sigma_star.matrix @ phi).real == pytest.approx(0.5, abs=1e-6)
    ref = measures.relative_entropy(rho, states.pure_closest(0.5))
    assert ref.nats == pytest.approx(res.value.nats, abs=1e-9)


@pytest.mark.parametrize("p", [0.9, 0.3])
def test_bound_pure_sigma_star(p):
    res = boundopt.upper_bound_ree(states.pure(p))
    np.testing.assert_allclose(res.sigma_star.matrix, states.pure_closest(p).matrix, atol=1e-3)


@pytest.mark.parametrize("p", [0.2, 0.7])
def test_bound_pure_family(p):
    res = boundopt.upper_bound_ree(states.pure(p))
    assert res.value.nats == pytest.approx(_h(p), abs=1e-4)


def test_bound_bell_diagonal_matches_oracle():
    rho = states.bell_diagonal(0.75, 0.25, 0, 0)
    res = boundopt.upper_bound_ree(rho)
    orc = boundopt.closest_ppt_oracle(rho, starts=32, seed=0)
    # closed form for rank-2 Bell-diagonal states: ln 2 - H(lambda)
    assert res.value.nats == pytest.approx(math.log(2) - _h(0.75), abs=1e-6)
    assert abs(res.value.nats - orc.value.nats) <= 1e-3
    _check_bound_invariants(rho, res)


def test_bound_diagnostics_and_conditions():
    res = boundopt.upper_bound_ree(states.werner(0.8))
    for key in ("starts", "best_start", "iterations", "simplex_size", "converged"):
        assert key in res.diagnostics
    assert res.conditions is not None and [c.party for c in res.conditions] == ["A", "B"]
    for o in res.rotations:
        np.testing.assert_allclose(o @ o.T, np.eye(3), atol=1e-12)


def test_bound_ppt_inputs_are_zero(rng):
    for _ in range(10):
        rho = states.random_state(rng)
        if measures.ppt_check(rho)[0]:
            assert boundopt.upper_bound_ree(rho).value.nats <= 1e-6


def test_bound_above_oracle_and_invariants(rng):
    for _ in range(4):
        rho = states.random_state(rng)
        res = boundopt.upper_bound_ree(rho)
        orc = boundopt.closest_ppt_oracle(rho, starts=8, seed=1)
        assert res.value.nats >= orc.value.nats - 1e-3
        _check_bound_invariants(rho, res)


def test_bound_local_unitary_invariance(rng):
    for _ in range(3):
        rho = states.random_state(rng)
        moved = states.apply_local_unitaries(rho, states.random_unitary(rng, 2), states.random_unitary(rng, 2))
        a = boundopt.upper_bound_ree(rho).value.nats
        b = boundopt.upper_bound_ree(moved).value.nats
        assert a == pytest.approx(b, abs=1e-6)


def test_bound_is_deterministic(rng):
    rho = states.random_state(rng)
    a, b = boundopt.upper_bound_ree(rho), boundopt.upper_bound_ree(rho)
    assert a.value.nats == b.value.nats
    assert a.sigma_star.matrix.tobytes() == b.sigma_star.matrix.tobytes()


def test_bound_threads_match_serial(rng):
    rho = states.random_state(rng)
    a = boundopt.upper_bound_ree(rho)
    b = boundopt.upper_bound_ree(rho, boundopt.BoundOptions(threads=4))
    assert a.value.nats == b.value.nats


def test_oracle_examples():
    prod = states.product(np.diag([0.3, 0.7]), states.qubit([0.2, 0.1, 0]))
    assert boundopt.closest_ppt_oracle(prod, starts=4).value.nats <= 1e-6
    res = boundopt.closest_ppt_oracle(states.pure(0.9), starts=16, seed=2)
    assert res.value.nats == pytest.approx(_h(0.9), abs=1e-3)
    assert res.value.nats >= _h(0.9) - 1e-6


def test_oracle_invariants_and_determinism(rng):
    rho = states.random_state(rng)
    a = boundopt.closest_ppt_oracle(rho, starts=6, seed=7)
    b = boundopt.closest_ppt_oracle(rho, starts=6, seed=7, threads=3)
    assert a.per_start_values == b.per_start_values
    assert a.sigma_star.matrix.tobytes() == b.sigma_star.matrix.tobytes()
    assert measures.ppt_check(a.sigma_star)[1] >= -1e-9
    assert a.value.nats <= min(a.per_start_values)
    assert a.value.nats == pytest.approx(measures.relative_entropy(rho, a.sigma_star).nats, abs=1e-10)
    assert a.starts == 6 and a.seed == 7


def test_oracle_rejects_zero_starts():
    with pytest.raises(InputError):
        boundopt.closest_ppt_oracle(states.pure(0.5), starts=0)


def test_sweep_pure():
    rows = boundopt.sweep("pure", "p", 0.0, 1.0, 11)
    assert len(rows) == 11
    params = [r["param"] for r in rows]
    assert params == sorted(params)
    assert rows[0]["bound_nats"] <= 1e-9 and rows[-1]["bound_nats"] <= 1e-9
    for r in rows:
        assert r["bound_nats"] == pytest.approx(_h(r["param"]), abs=1e-4)


def test_sweep_bell_diagonal_threshold():
    rows = boundopt.sweep("bell_diagonal", "lambda1", 0.5, 1.0, 6)
    assert rows[0]["bound_nats"] <= 1e-9
    assert rows[-1]["bound_nats"] == pytest.approx(math.log(2), abs=1e-6)


def test_sweep_with_oracle_column():
    rows = boundopt.sweep("werner", "F", 0.6, 0.9, 2, with_oracle=True, oracle_starts=4)
    assert all("oracle_nats" in r for r in rows)
    assert all(r["bound_nats"] >= r["oracle_nats"] - 1e-3 for r in rows)


def test_sweep_errors():
    with pytest.raises(InputError):
        boundopt.sweep("pure", "F", 0, 1, 3)
    with pytest.raises(InputError):
        boundopt.sweep("ghz", "p", 0, 1, 3)
    with pytest.raises(InputError):
        boundopt.sweep("pure", "p", 0, 1, 1)
