import numpy as np
import pytest
from hypothesis import given, strategies as st

from dieroll import sdp
from dieroll.cheating import bob_sdp, subset_alice_certificate, subset_alice_strategy, alice_sdp
from dieroll.matlin import BipartiteDims, partial_trace_A
from dieroll.protocol import build_subset_protocol

from conftest import random_hermitian


def lambda_max_problem(C, real=False):
    n = C.shape[0]
    bld = sdp.SdpBuilder(real=real)
    bld.add_block(n, C)
    bld.add_dense_constraints([(0, [np.eye(n)])], [1.0])
    return bld.build()


@pytest.mark.parametrize("real", [False, True])
def test_hermitian_basis_orthonormal(real):
    for n in (1, 2, 4):
        B = sdp.hermitian_basis(n, real).toarray()
        assert B.shape[1] == sdp.basis_size(n, real)
        G = B.conj().T @ B
        np.testing.assert_allclose(G.real, np.eye(B.shape[1]), atol=1e-14)


@given(st.integers(1, 5), st.booleans(), st.integers(0, 2**31))
def test_coords_round_trip(n, real, seed):
    rng = np.random.default_rng(seed)
    A = random_hermitian(rng, n, real)
    v = sdp.to_coords(A, real)
    np.testing.assert_allclose(sdp.from_coords(v, n, real), A, atol=1e-13)
    # coordinates are an isometry
    assert np.linalg.norm(v) == pytest.approx(np.linalg.norm(A), abs=1e-12)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31))
def test_partial_trace_term_adjoint(dA, dB, seed):
    # <A(X), y> = <X, A*(y)>
    rng = np.random.default_rng(seed)
    d = BipartiteDims(dA, dB)
    t = sdp.PartialTraceTerm(0, d, slice(0, dB * dB), 0.7)
    X = random_hermitian(rng, d.total)
    y = rng.normal(size=dB * dB)
    lhs = t.apply(X, False) @ y
    rhs = np.real(np.vdot(X, t.adjoint(y, False)))
    assert lhs == pytest.approx(rhs, abs=1e-10)
    np.testing.assert_allclose(
        sdp.from_coords(t.apply(X, False), dB, False), 0.7 * partial_trace_A(X, d), atol=1e-12
    )


def test_schur_matches_generic(rng):
    # tensor-contraction Schur complement against the dense column-by-column one
    d = BipartiteDims(2, 3)
    bld = sdp.SdpBuilder(real=False)
    bld.add_block(6)
    bld.add_partial_trace_constraint([(0, d, 1.0)], np.eye(3))
    prob = bld.build()
    W = random_hermitian(rng, 6)
    W = W @ W + np.eye(6)
    M = prob.schur([W])
    t = prob.terms[0]
    cols = []
    for i in range(prob.m):
        e = np.zeros(prob.m)
        e[i] = 1
        cols.append(t.apply(W @ t.adjoint(e, False) @ W, False))
    np.testing.assert_allclose(M, np.array(cols).T, atol=1e-10)


def test_rank_check_rejects_duplicate_rows():
    bld = sdp.SdpBuilder()
    bld.add_block(2)
    bld.add_dense_constraints([(0, [np.eye(2), 2 * np.eye(2)])], [1.0, 2.0])
    with pytest.raises(ValueError):
        bld.build()


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_lambda_max(n, rng):
    # [DERIVED] eigh oracle
    C = random_hermitian(rng, n)
    sol = sdp.solve(lambda_max_problem(C))
    assert sol.optimal
    assert sol.value == pytest.approx(np.linalg.eigvalsh(C)[-1], abs=1e-7)


def test_lambda_max_real_mode(rng):
    C = random_hermitian(rng, 6, real=True)
    sol = sdp.solve(lambda_max_problem(C, real=True))
    assert sol.value == pytest.approx(np.linalg.eigvalsh(C)[-1], abs=1e-7)
    assert not np.iscomplexobj(sol.X[0])


def test_scalar_equality():
    # [TRIVIAL] max x s.t. x = 0.7
    bld = sdp.SdpBuilder()
    bld.add_block(1, np.ones((1, 1)))
    bld.add_dense_constraints([(0, [np.ones((1, 1))])], [0.7])
    sol = sdp.solve(bld.build())
    assert sol.optimal
    assert sol.value == pytest.approx(0.7, abs=1e-8)


def test_bob_orthogonal_states():
    # [TRIVIAL] two orthogonal reduced states are perfectly distinguishable
    sol = sdp.solve(bob_sdp(build_subset_protocol(2, 1)))
    assert sol.value == pytest.approx(1.0, abs=1e-7)


def test_solution_invariants(rng):
    C = random_hermitian(rng, 5)
    prob = lambda_max_problem(C)
    sol = sdp.solve(prob)
    assert abs(sol.primal_value - sol.dual_value) <= sdp.GAP_TARGET * (1 + abs(sol.primal_value))
    assert sol.primal_residual <= 1e-8 * (1 + np.linalg.norm(prob.b))
    assert min(np.linalg.eigvalsh(B)[0] for B in sol.X) >= -1e-9
    assert min(np.linalg.eigvalsh(B)[0] for B in sol.S) >= -1e-9


def test_deterministic(rng):
    prob = lambda_max_problem(random_hermitian(rng, 6))
    a, b = sdp.solve(prob), sdp.solve(prob)
    assert a.iterations == b.iterations
    assert a.primal_value == b.primal_value and a.dual_value == b.dual_value


def test_iteration_cap_reported(rng):
    sol = sdp.solve(lambda_max_problem(random_hermitian(rng, 6)), max_iters=2)
    assert sol.status == "max_iters"
    assert not sol.optimal


def test_verify_pair_self_consistent(rng):
    prob = lambda_max_problem(random_hermitian(rng, 4))
    sol = sdp.solve(prob)
    rep = sdp.verify_feasible_pair(prob, sol.X, sol.y)
    assert rep.primal_ok and rep.dual_ok
    assert abs(rep.gap) <= 2 * sdp.GAP_TARGET * (1 + abs(sol.primal_value))


def test_verify_pair_broken_equality(rng):
    prob = lambda_max_problem(random_hermitian(rng, 4))
    sol = sdp.solve(prob)
    rep = sdp.verify_feasible_pair(prob, [0.5 * sol.X[0]], sol.y)
    assert not rep.primal_ok


def test_verify_pair_subset_closed_form():
    # [DERIVED] closed-form Alice strategy and certificate on (5,2), mapped into SDP variables
    D, m = 5, 2
    p = build_subset_protocol(D, m)
    prob = alice_sdp(p)
    strat = subset_alice_strategy(D, m)
    cert = subset_alice_certificate(D, m)
    X = [strat.sigma] + [np.outer(s, s.conj()) for s in strat.sigmas]
    y = np.zeros(prob.m)
    for a, Z in enumerate(cert.Z):
        y[prob.labels["rows"][a]] = sdp.to_coords(Z, prob.real)
    y[prob.labels["trace_row"]] = cert.s
    rep = sdp.verify_feasible_pair(prob, X, y)
    assert rep.primal_ok and rep.dual_ok
    assert 0 <= rep.gap <= D * cert.eps + 1e-9


def _random_feasible_pair(rng):
    n = int(rng.integers(2, 6))
    dA = int(rng.integers(1, 3))
    dims = BipartiteDims(dA, n)
    bld = sdp.SdpBuilder(real=False)
    C0 = random_hermitian(rng, n)
    C1 = random_hermitian(rng, dims.total)
    bld.add_block(n, C0)
    bld.add_block(dims.total, C1)
    tr = bld.add_dense_constraints([(0, [np.eye(n)])], [0.0])
    bld.add_partial_trace_constraint([(1, dims, 1.0), (0, BipartiteDims(1, n), -1.0)], np.zeros((n, n)))
    # random PSD X, then set b so that X satisfies the equalities
    G1 = rng.normal(size=(dims.total, dims.total)) + 1j * rng.normal(size=(dims.total, dims.total))
    X1 = G1 @ G1.conj().T
    X0 = partial_trace_A(X1, dims)
    bld.b[tr] = [np.trace(X0).real]
    prob = bld.build(check_rank=False)
    assert np.linalg.norm(prob.apply([X0, X1]) - prob.b) < 1e-8 * (1 + np.linalg.norm(prob.b))
    # random dual with slack completion: pick the y-block for Tr_A, then the trace multiplier
    Y = random_hermitian(rng, n)
    y = np.zeros(prob.m)
    y[1:] = sdp.to_coords(Y, False)
    S1 = np.kron(np.eye(dA), Y) - C1
    shift = max(0.0, -np.linalg.eigvalsh(S1)[0])
    y[1:] += sdp.to_coords(shift * np.eye(n), False)
    S0 = prob.adjoint(y)[0] - C0
    y[0] = max(0.0, -np.linalg.eigvalsh(S0)[0]) + 10 ** rng.uniform(-9, 0)
    return prob, [X0, X1], y


def test_weak_duality_random_pairs():
    # 200 random feasible primal/dual pairs: b.y >= <C, X>
    rng = np.random.default_rng(99)
    for _ in range(200):
        prob, X, y = _random_feasible_pair(rng)
        rep = sdp.verify_feasible_pair(prob, X, y)
        assert rep.primal_ok and rep.dual_ok
        assert rep.gap >= -1e-9
