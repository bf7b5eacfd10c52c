"""Trading one party's cheating probability against the other's.

Both transformations mix every commitment state with fresh orthogonal
directions of weight ``t``:

* ``reduce_bob`` adds one shared direction ``|⊥,⊥>``, pulling the states
  together (Bob learns less, Alice can fake more easily);
* ``reduce_alice`` adds a private direction ``|⊥_a,⊥_a>`` per outcome,
  pushing them apart.

Dual certificates of the original protocol are carried over in closed form,
so the new protocol's bounds are certified without solving anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np
from scipy.linalg import block_diag

from .cheating import (
    AliceCertificate,
    BobCertificate,
    analyze,
    default_eps,
    subset_alice_certificate,
    subset_bob_certificate,
)
from .matlin import BipartiteDims
from .protocol import DricProtocol, build_subset_protocol

ZETA = 1e-10
REDUCE_BOB = "reduce_bob"
REDUCE_ALICE = "reduce_alice"
NO_OP = "none"


def _check_t(t):
    if not 0 < t < 1:
        raise ValueError(f"mixing weight must lie in (0, 1), got {t}")


def _embed(psi: np.ndarray, dims: BipartiteDims, extra: int) -> np.ndarray:
    """Copy amplitudes into the space with ``extra`` basis vectors appended to each factor."""
    nA, nB = dims.dimA, dims.dimB
    out = np.zeros((nA + extra, nB + extra), dtype=psi.dtype)
    out[:nA, :nB] = psi.reshape(nA, nB)
    return out


def extend_reduce_bob(p: DricProtocol, t: float) -> DricProtocol:
    """``|psi'_a> = sqrt(1-t)|psi_a> + sqrt(t)|⊥,⊥>``."""
    _check_t(t)
    t = float(t)
    states = []
    for psi in p.states:
        T = np.sqrt(1 - t) * _embed(psi, p.dims, 1)
        T[-1, -1] = np.sqrt(t)
        states.append(T.reshape(-1))
    dims = BipartiteDims(p.dims.dimA + 1, p.dims.dimB + 1)
    meta = {"kind": REDUCE_BOB, "t": t, "parent": p.meta}
    return DricProtocol(p.D, dims, tuple(states), f"{p.label}+bob(t={t:.6g})", meta)


def extend_reduce_alice(p: DricProtocol, t: float) -> DricProtocol:
    """``|psi'_a> = sqrt(1-t)|psi_a> + sqrt(t)|⊥_a,⊥_a>``."""
    _check_t(t)
    t = float(t)
    nA, nB = p.dims.dimA, p.dims.dimB
    states = []
    for a, psi in enumerate(p.states):
        T = np.sqrt(1 - t) * _embed(psi, p.dims, p.D)
        T[nA + a, nB + a] = np.sqrt(t)
        states.append(T.reshape(-1))
    dims = BipartiteDims(nA + p.D, nB + p.D)
    meta = {"kind": REDUCE_ALICE, "t": t, "parent": p.meta}
    return DricProtocol(p.D, dims, tuple(states), f"{p.label}+alice(t={t:.6g})", meta)


def _positive_definite(Z) -> bool:
    try:
        np.linalg.cholesky((Z + Z.conj().T) / 2)
    except np.linalg.LinAlgError:
        return False
    return True


def transport_certificates(
    p: DricProtocol,
    direction: str,
    t: float,
    certs: tuple,
    zeta: float = ZETA,
) -> tuple[BobCertificate, AliceCertificate]:
    """Dual certificates for the extended protocol built from ones for ``p``.

    Returns a Bob certificate with trace ``(1-t) Tr X + t/D`` (``reduce_bob``)
    or ``(1-t) Tr X + t`` (``reduce_alice``), and an inverse-form Alice
    certificate with ``s' = (1-t)s + t`` or ``(1-t)s + t/D + (D-1) zeta``.
    """
    _check_t(t)
    bob, alice = certs
    D = p.D
    s = alice.s
    for a, Z in enumerate(alice.Z, 1):
        if not _positive_definite(Z):
            raise ValueError(f"Z_{a} is not positive definite; transport needs a strictly feasible certificate")
    if direction == REDUCE_BOB:
        X = block_diag((1 - t) * bob.X, np.array([[t / D]]))
        eps = (s * (1 - t) + t) / D
        delta = (1 - t) + t / s
        Z = [block_diag(delta * Za, np.array([[eps]])) for Za in alice.Z]
        s_new = max(delta * s, eps * D)
    elif direction == REDUCE_ALICE:
        X = block_diag((1 - t) * bob.X, (t / D) * np.eye(D))
        eps = (1 - t) * s + t / D
        delta = (1 - t) + t / (D * s)
        Z = []
        for a, Za in enumerate(alice.Z):
            tail = np.full(D, zeta)
            tail[a] = eps
            Z.append(block_diag(delta * Za, np.diag(tail)))
        s_new = max(delta * s, eps + zeta * (D - 1))
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return BobCertificate(X), AliceCertificate(float(s_new), Z, form="inverse", eps=alice.eps)


def _direction(alpha, beta) -> str:
    if beta > alpha:
        return REDUCE_BOB
    if alpha > beta:
        return REDUCE_ALICE
    return NO_OP


def optimal_t(alpha, beta, D: int, direction: str | None = None):
    """Mixing weight equating the two upper bounds; ``0`` when already balanced."""
    natural = _direction(alpha, beta)
    if direction is not None and natural != NO_OP and direction != natural:
        raise ValueError(f"{direction} needs the other party to cheat more (alpha={alpha}, beta={beta})")
    if natural == NO_OP:
        return 0 * alpha
    gap = abs(beta - alpha)
    one = Fraction(1) if isinstance(gap, Fraction) else 1.0
    return gap / ((one - one / D) + gap)


def corollary_bound(alpha, beta, D: int, direction: str | None = None):
    """``(D max - min) / (D |beta - alpha| + D - 1)`` for cheat values ``alpha, beta``."""
    natural = _direction(alpha, beta)
    if direction is not None and natural != NO_OP and direction != natural:
        raise ValueError(f"{direction} does not apply when alpha={alpha}, beta={beta}")
    hi, lo = max(alpha, beta), min(alpha, beta)
    return (D * hi - lo) / (D * abs(beta - alpha) + D - 1)


def lemma_bounds(alpha, beta, D: int, direction: str, t):
    """Upper bounds ``(bob, alice)`` on the extended protocol's cheating."""
    if direction == REDUCE_BOB:
        return (1 - t) * beta + t / D, (1 - t) * alpha + t
    if direction == REDUCE_ALICE:
        return (1 - t) * beta + t, (1 - t) * alpha + t / D
    return beta, alpha


@dataclass(frozen=True)
class BalanceResult:
    source: DricProtocol
    transformed: DricProtocol
    t: float
    direction: str
    alpha: object
    beta: object
    transported_certs: tuple
    bound: object

    @property
    def certified_bob(self) -> float:
        return self.transported_certs[0].value

    @property
    def certified_alice(self) -> float:
        return self.transported_certs[1].value

    def summary(self) -> dict:
        return {
            "source": self.source.label,
            "transformed": self.transformed.label,
            "dimA": self.transformed.dims.dimA,
            "dimB": self.transformed.dims.dimB,
            "t": float(self.t),
            "direction": self.direction,
            "alpha": float(self.alpha),
            "beta": float(self.beta),
            "bound": float(self.bound),
            "bound_exact": str(self.bound),
            "certified_bob": self.certified_bob,
            "certified_alice": self.certified_alice,
        }


def balance(p: DricProtocol, alpha, beta, certs: tuple, t=None, zeta: float = ZETA) -> BalanceResult:
    """One balancing round for a protocol with cheat values ``alpha`` (Alice), ``beta`` (Bob)."""
    direction = _direction(alpha, beta)
    bound = corollary_bound(alpha, beta, p.D)
    if direction == NO_OP:
        return BalanceResult(p, p, 0.0, NO_OP, alpha, beta, tuple(certs), bound)
    t = optimal_t(alpha, beta, p.D) if t is None else t
    if direction == REDUCE_BOB:
        q = extend_reduce_bob(p, float(t))
    else:
        q = extend_reduce_alice(p, float(t))
    new_certs = transport_certificates(p, direction, float(t), certs, zeta)
    return BalanceResult(p, q, float(t), direction, alpha, beta, new_certs, bound)


def balance_subset(D: int, m: int, eps: float | None = None, zeta: float = ZETA) -> BalanceResult:
    p = build_subset_protocol(D, m)
    certs = (subset_bob_certificate(D, m), subset_alice_certificate(D, m, eps))
    return balance(p, Fraction(m, D), Fraction(1, m), certs, zeta=zeta)


def sqrt_floor_ceil(D: int) -> tuple[int, int]:
    f = isqrt(D)
    return f, f if f * f == D else f + 1


def theorem1_pipeline(D: int, eps: float | None = None, zeta: float = ZETA) -> BalanceResult:
    """Balance the subset protocols with ``m = floor(sqrt D)`` and ``ceil(sqrt D)``; keep the better one.

    Ties go to the smaller transformed state space.
    """
    if D < 2:
        raise ValueError("D must be at least 2")
    eps = default_eps(D) if eps is None else eps
    best = None
    for m in sorted(set(sqrt_floor_ceil(D))):
        res = balance_subset(D, m, eps, zeta)
        key = (res.bound, res.transformed.dims.total)
        if best is None or key < best[0]:
            best = (key, res)
    return best[1]


def iterate_balance(res: BalanceResult, rounds: int = 1, eps: float = 1e-9) -> list[BalanceResult]:
    """Re-balance using solved cheat values of the previous round's protocol.

    Off by default in the pipeline; every round needs both SDPs to be solvable.
    """
    out = [res]
    for _ in range(rounds):
        cur = out[-1].transformed
        rep = analyze(cur, mode="solve")
        if rep.solver_alice is None or rep.solver_bob is None:
            raise ValueError("protocol too large to solve for another balancing round")
        bc = rep.bob_certificate
        ac = rep.alice_certificate
        n = ac.Z[0].shape[0]
        ac = AliceCertificate(ac.s + eps * cur.D, [Z + eps * np.eye(n) for Z in ac.Z], form="inverse", eps=eps)
        out.append(balance(cur, rep.p_alice_upper, rep.p_bob_upper, (bc, ac)))
    return out
