"""Cheating probabilities of commitment-based die-rolling protocols.

Bob cheats by guessing ``a`` from his half of the commitment (a state
discrimination problem on the reduced states ``rho_a``).  Alice cheats by
preparing states ``sigma_a`` on A (x) B that agree on B before she learns
``b``.  Both optima are semidefinite programs; feasible dual points give
upper bounds, explicit strategies give lower bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import sdp
from .matlin import (
    BipartiteDims,
    hermitian_inverse,
    inner,
    psd_check,
    reduce_pure_A,
    symmetrize,
)
from .protocol import DricProtocol, reduced_states, subsets

BOB_SOLVE_CAP = 64
ALICE_SOLVE_CAP = 576
OPERATOR_CHECK_CAP = 4096
STRATEGY_TOL = 1e-9


def default_eps(D: int) -> float:
    return 1e-8 / D


# --------------------------------------------------------------------------
# Strategies and certificates


@dataclass(frozen=True)
class BobStrategy:
    measurement: list

    def check(self, tol: float = 1e-10) -> bool:
        n = self.measurement[0].shape[0]
        total = sum(self.measurement)
        if np.max(np.abs(total - np.eye(n))) > tol:
            return False
        return all(psd_check(M, tol) for M in self.measurement)


@dataclass(frozen=True)
class BobCertificate:
    X: np.ndarray

    @property
    def value(self) -> float:
        return float(np.real(np.trace(self.X)))


@dataclass(frozen=True)
class AliceStrategy:
    """``sigma`` on B and per-outcome states on A (x) B.

    Entries of ``sigmas`` may be 1-d amplitude vectors, meaning the pure
    state they define; this keeps large strategies cheap to store.
    """

    sigma: np.ndarray
    sigmas: list
    dims: BipartiteDims

    def reduced(self, a: int) -> np.ndarray:
        s = self.sigmas[a - 1]
        if s.ndim == 1:
            return reduce_pure_A(s, self.dims)
        a_, b_ = self.dims.dimA, self.dims.dimB
        return np.einsum("ajak->jk", s.reshape(a_, b_, a_, b_))

    def check(self, tol: float = STRATEGY_TOL) -> bool:
        if abs(np.real(np.trace(self.sigma)) - 1) > tol:
            return False
        if not psd_check(self.sigma, tol):
            return False
        for a, s in enumerate(self.sigmas, 1):
            if np.max(np.abs(self.reduced(a) - self.sigma)) > tol:
                return False
            if s.ndim == 2 and not psd_check(s, tol):
                return False
        return True


@dataclass(frozen=True)
class AliceCertificate:
    """Dual point ``(s, Z_1..Z_D)`` for Alice's SDP.

    ``form`` is ``"operator"`` (``I ⊗ Z_a >= |psi_a><psi_a|/D``) or
    ``"inverse"`` (``Z_a > 0`` and ``<Z_a^{-1}, rho_a> <= D``).
    """

    s: float
    Z: list
    form: str = "inverse"
    eps: float | None = None

    def __post_init__(self):
        if self.form not in ("operator", "inverse"):
            raise ValueError(f"unknown certificate form {self.form!r}")

    @property
    def value(self) -> float:
        return float(self.s)


@dataclass(frozen=True)
class CertCheck:
    ok: bool
    value: float
    worst_margin: float
    detail: str = ""

    def __bool__(self):
        return self.ok


# --------------------------------------------------------------------------
# SDP formulations


def discrimination_sdp(rhos, priors) -> sdp.SdpProblem:
    """``max sum_a p_a <M_a, rho_a>`` over POVMs ``{M_a}``."""
    n = rhos[0].shape[0]
    real = not any(np.iscomplexobj(r) and np.any(r.imag) for r in rhos)
    bld = sdp.SdpBuilder(real=real)
    blocks = [bld.add_block(n, pa * np.asarray(r)) for pa, r in zip(priors, rhos)]
    ident = BipartiteDims(1, n)
    bld.add_partial_trace_constraint([(k, ident, 1.0) for k in blocks], np.eye(n))
    return bld.build()


def bob_sdp(p: DricProtocol) -> sdp.SdpProblem:
    rhos = reduced_states(p)
    if p.dims.dimB > BOB_SOLVE_CAP:
        raise ValueError(f"dim B = {p.dims.dimB} exceeds the Bob solve cap {BOB_SOLVE_CAP}")
    return discrimination_sdp(rhos, [1 / p.D] * p.D)


def alice_sdp(p: DricProtocol) -> sdp.SdpProblem:
    """Block 0 is ``sigma``; block ``a`` is ``sigma_a``; the last row is ``Tr sigma = 1``."""
    N = p.dims.total
    if N > ALICE_SOLVE_CAP:
        raise ValueError(f"dim A*B = {N} exceeds the Alice solve cap {ALICE_SOLVE_CAP}")
    nB = p.dims.dimB
    bld = sdp.SdpBuilder(real=p.is_real)
    k0 = bld.add_block(nB, label="sigma")
    ks = [bld.add_block(N, np.outer(psi, psi.conj()) / p.D) for psi in p.states]
    rows = []
    for k in ks:
        r = bld.add_partial_trace_constraint(
            [(k, p.dims, 1.0), (k0, BipartiteDims(1, nB), -1.0)], np.zeros((nB, nB))
        )
        rows.append(r)
    tr = bld.add_partial_trace_constraint([(k0, BipartiteDims(nB, 1), 1.0)], np.eye(1))
    prob = bld.build()
    prob.labels["rows"] = rows
    prob.labels["trace_row"] = tr
    return prob


def _solve_checked(prob, gap_target):
    sol = sdp.solve(prob, gap_target=gap_target)
    if not sol.optimal:
        raise RuntimeError(f"SDP solver finished with status {sol.status}")
    return sol


@dataclass(frozen=True)
class SolvedParty:
    value: float
    primal_value: float
    dual_value: float
    strategy: object
    certificate: object
    solution: sdp.SdpSolution


def solve_bob(p: DricProtocol, gap_target: float = sdp.GAP_TARGET) -> SolvedParty:
    prob = bob_sdp(p)
    sol = _solve_checked(prob, gap_target)
    M = [symmetrize(B) for B in sol.X]
    Y = sdp.from_coords(sol.y, p.dims.dimB, prob.real)
    cert = repair_bob_certificate(p, BobCertificate(symmetrize(Y)))
    return SolvedParty(sol.value, sol.primal_value, sol.dual_value, BobStrategy(M), cert, sol)


def solve_alice(p: DricProtocol, gap_target: float = sdp.GAP_TARGET) -> SolvedParty:
    prob = alice_sdp(p)
    sol = _solve_checked(prob, gap_target)
    strat = AliceStrategy(symmetrize(sol.X[0]), [symmetrize(B) for B in sol.X[1:]], p.dims)
    nB = p.dims.dimB
    Z = [symmetrize(sdp.from_coords(sol.y[r], nB, prob.real)) for r in prob.labels["rows"]]
    s = float(sol.y[prob.labels["trace_row"]][0])
    cert = repair_alice_certificate(p, AliceCertificate(s, Z, form="operator"))
    return SolvedParty(sol.value, sol.primal_value, sol.dual_value, strat, cert, sol)


def repair_bob_certificate(p: DricProtocol, cert: BobCertificate) -> BobCertificate:
    """Shift ``X`` by a multiple of identity until every ``X - rho_a/D`` is PSD."""
    shift = 0.0
    for rho in reduced_states(p):
        lmin = np.linalg.eigvalsh(symmetrize(cert.X - rho / p.D))[0]
        shift = max(shift, -lmin)
    return BobCertificate(cert.X + shift * np.eye(cert.X.shape[0]))


def repair_alice_certificate(p: DricProtocol, cert: AliceCertificate) -> AliceCertificate:
    """Make an approximate operator-form point exactly feasible (shift each Z_a, recompute s)."""
    Z = []
    eye_a = np.eye(p.dims.dimA)
    for psi, Za in zip(p.states, cert.Z):
        K = np.kron(eye_a, Za) - np.outer(psi, psi.conj()) / p.D
        lmin = np.linalg.eigvalsh(symmetrize(K))[0]
        Z.append(Za + max(0.0, -lmin) * np.eye(Za.shape[0]))
    s = float(np.linalg.eigvalsh(symmetrize(sum(Z)))[-1])
    return AliceCertificate(max(s, cert.s), Z, form="operator")


# --------------------------------------------------------------------------
# Values and verification


def bob_strategy_value(p: DricProtocol, strat: BobStrategy, priors=None) -> float:
    priors = [1 / p.D] * p.D if priors is None else priors
    rhos = reduced_states(p)
    return float(sum(pa * inner(M, r) for pa, M, r in zip(priors, strat.measurement, rhos)))


def alice_strategy_value(p: DricProtocol, strat: AliceStrategy) -> float:
    total = 0.0
    for psi, s in zip(p.states, strat.sigmas):
        if s.ndim == 1:
            total += abs(np.vdot(s, psi)) ** 2
        else:
            total += float(np.real(np.vdot(psi, s @ psi)))
    return total / p.D


def verify_bob_certificate(p: DricProtocol, cert: BobCertificate, tol: float | None = None) -> CertCheck:
    """Upper bound ``Tr X`` on Bob's cheating if ``X >= rho_a / D`` for all a."""
    worst = np.inf
    for a, rho in enumerate(reduced_states(p), 1):
        rep = psd_check(cert.X - rho / p.D, tol)
        worst = min(worst, rep.lambda_min)
        if not rep:
            return CertCheck(False, cert.value, worst, f"X - rho_{a}/D has eigenvalue {rep.lambda_min:.3e}")
    return CertCheck(True, cert.value, worst)


def verify_alice_certificate(
    p: DricProtocol, cert: AliceCertificate, tol: float | None = None, rtol: float = 1e-9
) -> CertCheck:
    """Upper bound ``s`` on Alice's cheating if the certificate is dual feasible."""
    if len(cert.Z) != p.D:
        raise ValueError(f"certificate has {len(cert.Z)} matrices, protocol has D={p.D}")
    nB = p.dims.dimB
    rep = psd_check(cert.s * np.eye(nB) - sum(cert.Z), tol)
    worst = rep.lambda_min
    if not rep:
        return CertCheck(False, cert.s, worst, f"s I - sum Z_a has eigenvalue {rep.lambda_min:.3e}")
    if cert.form == "inverse":
        for a, (Za, rho) in enumerate(zip(cert.Z, reduced_states(p)), 1):
            try:
                Zinv = hermitian_inverse(Za)
            except np.linalg.LinAlgError as exc:
                raise ValueError(f"Z_{a} is not positive definite") from exc
            t = inner(Zinv, rho)
            margin = p.D - t
            worst = min(worst, margin)
            if margin < -rtol * p.D:
                return CertCheck(False, cert.s, worst, f"<Z_{a}^-1, rho_{a}> = {t:.12g} > D")
        return CertCheck(True, cert.s, worst)
    N = p.dims.total
    if N > OPERATOR_CHECK_CAP:
        raise ValueError(f"operator-form check needs a {N}x{N} matrix; use the inverse form")
    eye_a = np.eye(p.dims.dimA)
    for a, (Za, psi) in enumerate(zip(cert.Z, p.states), 1):
        rep = psd_check(np.kron(eye_a, Za) - np.outer(psi, psi.conj()) / p.D, tol)
        worst = min(worst, rep.lambda_min)
        if not rep:
            return CertCheck(False, cert.s, worst, f"I ⊗ Z_{a} - psi psi^H / D has eigenvalue {rep.lambda_min:.3e}")
    return CertCheck(True, cert.s, worst)


def to_operator_form(cert: AliceCertificate) -> AliceCertificate:
    return AliceCertificate(cert.s, list(cert.Z), form="operator", eps=cert.eps)


def kitaev_bob_strategy(cert: AliceCertificate) -> BobStrategy:
    """Turn a feasible Alice dual point into a measurement for Bob.

    ``Z_1`` absorbs the slack ``s I - sum Z_a`` so that the ``Z_a / s`` sum
    to identity.
    """
    n = cert.Z[0].shape[0]
    Z = [np.array(z, copy=True) for z in cert.Z]
    Z[0] = Z[0] + (cert.s * np.eye(n) - sum(cert.Z))
    return BobStrategy([z / cert.s for z in Z])


# --------------------------------------------------------------------------
# Closed forms for subset protocols


def _subset_masks(D: int, m: int) -> np.ndarray:
    """``mask[a-1, i]`` is True when ``a`` lies in the i-th subset."""
    T = subsets(D, m)
    mask = np.zeros((D, len(T)), dtype=bool)
    for i, S in enumerate(T):
        mask[[x - 1 for x in S], i] = True
    return mask


def subset_bob_strategy(D: int, m: int) -> BobStrategy:
    """Measure the subset, guess uniformly among its m members."""
    mask = _subset_masks(D, m)
    return BobStrategy([np.diag(mask[a] / m) for a in range(D)])


def subset_bob_certificate(D: int, m: int) -> BobCertificate:
    n = comb(D, m)
    return BobCertificate(np.eye(n) / (D * comb(D - 1, m - 1)))


def subset_alice_strategy(D: int, m: int) -> AliceStrategy:
    """Send half of the maximally entangled state over all m-subsets."""
    n = comb(D, m)
    phi = np.eye(n).reshape(-1) / np.sqrt(n)
    return AliceStrategy(np.eye(n) / n, [phi] * D, BipartiteDims(n, n))


def subset_alice_certificate(D: int, m: int, eps: float | None = None) -> AliceCertificate:
    """Inverse-form certificate with ``s = m/D + eps D``."""
    eps = default_eps(D) if eps is None else eps
    if eps <= 0:
        raise ValueError("eps must be positive")
    mask = _subset_masks(D, m)
    Z = [np.diag(np.where(mask[a], 1 / D, eps)) for a in range(D)]
    return AliceCertificate(m / D + eps * D, Z, form="inverse", eps=eps)


# --------------------------------------------------------------------------
# Orchestration


@dataclass
class CheatReport:
    D: int
    p_bob_lower: float | None = None
    p_bob_upper: float | None = None
    p_alice_lower: float | None = None
    p_alice_upper: float | None = None
    bob_strategy: BobStrategy | None = None
    bob_certificate: BobCertificate | None = None
    alice_strategy: AliceStrategy | None = None
    alice_certificate: AliceCertificate | None = None
    solver_bob: float | None = None
    solver_alice: float | None = None
    notes: list = field(default_factory=list)

    @property
    def kitaev_product(self) -> float | None:
        if self.p_alice_lower is None or self.p_bob_lower is None:
            return None
        return self.p_alice_lower * self.p_bob_lower

    def sandwich_ok(self, tol: float = 1e-6) -> bool:
        for lo, mid, hi in (
            (self.p_bob_lower, self.solver_bob, self.p_bob_upper),
            (self.p_alice_lower, self.solver_alice, self.p_alice_upper),
        ):
            vals = [v for v in (lo, mid, hi) if v is not None]
            if any(x > y + tol for x, y in zip(vals, vals[1:])):
                return False
        return True

    def summary(self) -> dict:
        return {
            "D": self.D,
            "p_bob_lower": self.p_bob_lower,
            "p_bob_upper": self.p_bob_upper,
            "p_alice_lower": self.p_alice_lower,
            "p_alice_upper": self.p_alice_upper,
            "solver_bob": self.solver_bob,
            "solver_alice": self.solver_alice,
            "kitaev_product": self.kitaev_product,
            "notes": list(self.notes),
        }



def analyze(
    p: DricProtocol,
    mode: str = "closed_form_if_known",
    certificates: tuple | None = None,
    eps: float | None = None,
    gap_target: float = sdp.GAP_TARGET,
) -> CheatReport:
    """Bracket both parties' optimal cheating probabilities.

    ``mode``: ``closed_form_if_known`` uses the subset-protocol constructions
    when ``p`` is one, ``solve`` runs both SDPs, ``both`` does both.
    Extra ``certificates = (bob_cert, alice_cert)`` are verified and used.
    """
    if mode not in ("closed_form_if_known", "solve", "both", "certify"):
        raise ValueError(f"unknown mode {mode!r}")
    rep = CheatReport(p.D)
    use_closed = mode in ("closed_form_if_known", "both", "certify")
    use_solve = mode in ("solve", "both")

    def add_bob_cert(cert):
        chk = verify_bob_certificate(p, cert)
        if not chk:
            raise ValueError(f"Bob certificate infeasible: {chk.detail}")
        if rep.p_bob_upper is None or chk.value < rep.p_bob_upper:
            rep.p_bob_upper, rep.bob_certificate = chk.value, cert

    def add_alice_cert(cert):
        chk = verify_alice_certificate(p, cert)
        if not chk:
            raise ValueError(f"Alice certificate infeasible: {chk.detail}")
        if rep.p_alice_upper is None or chk.value < rep.p_alice_upper:
            rep.p_alice_upper, rep.alice_certificate = chk.value, cert

    if use_closed and p.meta.get("kind") == "subset":
        m = p.meta["m"]
        bs = subset_bob_strategy(p.D, m)
        rep.p_bob_lower, rep.bob_strategy = bob_strategy_value(p, bs), bs
        as_ = subset_alice_strategy(p.D, m)
        rep.p_alice_lower, rep.alice_strategy = alice_strategy_value(p, as_), as_
        add_bob_cert(subset_bob_certificate(p.D, m))
        add_alice_cert(subset_alice_certificate(p.D, m, eps))
        rep.notes.append("closed-form subset strategies and certificates")

    if certificates is not None:
        bc, ac = certificates
        if bc is not None:
            add_bob_cert(bc)
        if ac is not None:
            add_alice_cert(ac)

    if use_solve:
        if p.dims.dimB <= BOB_SOLVE_CAP:
            sb = solve_bob(p, gap_target)
            rep.solver_bob = sb.value
            if rep.p_bob_lower is None or sb.primal_value > rep.p_bob_lower:
                rep.p_bob_lower, rep.bob_strategy = sb.primal_value, sb.strategy
            add_bob_cert(sb.certificate)
        else:
            rep.notes.append("Bob SDP above solve cap; certificate bounds only")
        if p.dims.total <= ALICE_SOLVE_CAP:
            sa = solve_alice(p, gap_target)
            rep.solver_alice = sa.value
            if rep.p_alice_lower is None or sa.primal_value > rep.p_alice_lower:
                rep.p_alice_lower, rep.alice_strategy = sa.primal_value, sa.strategy
            add_alice_cert(sa.certificate)
        else:
            rep.notes.append("Alice SDP above solve cap; certificate bounds only")
    return rep
