"""Closed-form die-rolling bounds and the discrimination bound from dual witnesses."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import floor, isqrt, sqrt

import numpy as np

from . import sdp
from .balancing import sqrt_floor_ceil
from .cheating import AliceCertificate, discrimination_sdp, solve_alice
from .matlin import BipartiteDims, hermitian_inverse, inner, symmetrize
from .protocol import DricProtocol


def pct(x) -> int:
    """Truncated percentage ``floor(100 x)``, exact for rationals."""
    if isinstance(x, (Fraction, int)):
        return floor(100 * Fraction(x))
    return floor(100 * x)


def lemma1_bound(D: int) -> Fraction:
    f, c = sqrt_floor_ceil(D)
    return min(Fraction(c, D), Fraction(1, f))


def kitaev_bound(D: int) -> float:
    return 1 / sqrt(D)


def kitaev_pct(D: int) -> int:
    """``floor(100 / sqrt(D))`` in integer arithmetic."""
    return isqrt(10000 // D)


def as10_values(D: int) -> tuple[Fraction, Fraction]:
    """Alice's and Bob's cheating for the three-message reference protocol."""
    return Fraction(D + 1, 2 * D), Fraction(2 * D - 1, D * D)


def as10_bound(D: int) -> Fraction:
    return max(as10_values(D))


def theorem1_bound(D: int) -> Fraction:
    f, c = sqrt_floor_ceil(D)
    return min(Fraction(D + f, D * (f + 1)), Fraction(1 + c, D + c))


@dataclass(frozen=True)
class BoundsRow:
    D: int
    classical: Fraction
    quantum: Fraction
    kitaev: float
    as10: Fraction

    @property
    def percentages(self) -> dict:
        return {
            "as10": pct(self.as10),
            "classical": pct(self.classical),
            "quantum": pct(self.quantum),
            "kitaev": kitaev_pct(self.D),
        }


def bounds_row(D: int) -> BoundsRow:
    return BoundsRow(D, lemma1_bound(D), theorem1_bound(D), kitaev_bound(D), as10_bound(D))


def bounds_table(d_min: int = 2, d_max: int = 10) -> list[BoundsRow]:
    return [bounds_row(D) for D in range(d_min, d_max + 1)]


CSV_COLUMNS = [
    "D",
    "classical_exact",
    "classical_pct",
    "quantum_exact",
    "quantum_pct",
    "kitaev",
    "kitaev_pct",
    "as10_exact",
    "as10_pct",
]


def table_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        pc = r.percentages
        w.writerow([r.D, r.classical, pc["classical"], r.quantum, pc["quantum"],
                    repr(r.kitaev), pc["kitaev"], r.as10, pc["as10"]])
    return buf.getvalue()


# --------------------------------------------------------------------------
# State discrimination


@dataclass(frozen=True)
class QsdEnsemble:
    states: tuple
    priors: tuple

    def __post_init__(self):
        if len(self.states) != len(self.priors) or not self.states:
            raise ValueError("need one prior per state")
        n = self.states[0].shape[0]
        for i, rho in enumerate(self.states):
            if rho.shape != (n, n):
                raise ValueError(f"state {i} has shape {rho.shape}")
            if abs(np.trace(rho).real - 1) > 1e-10:
                raise ValueError(f"state {i} has trace {np.trace(rho).real}")
            if np.linalg.eigvalsh(symmetrize(rho))[0] < -1e-10:
                raise ValueError(f"state {i} is not PSD")
        p = np.asarray(self.priors, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("priors must be a probability vector")

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]


def qsd_optimum(e: QsdEnsemble, gap_target: float = sdp.GAP_TARGET) -> float:
    """Optimal minimum-error success probability, by SDP."""
    prob = discrimination_sdp(list(e.states), list(e.priors))
    sol = sdp.solve(prob, gap_target=gap_target)
    if not sol.optimal:
        raise RuntimeError(f"SDP solver finished with status {sol.status}")
    return sol.value


def check_witnesses(W, states, tol: float = 1e-10) -> None:
    worst, worst_i = -np.inf, None
    for i, (Wi, rho) in enumerate(zip(W, states)):
        v = inner(Wi, rho)
        if v - 1 > worst:
            worst, worst_i = v - 1, i
    if worst > tol:
        raise ValueError(f"<W_{worst_i + 1}, rho_{worst_i + 1}> exceeds 1 by {worst:.3e}")


def qsd_lower_bound(W, e: QsdEnsemble, tol: float = 1e-10) -> float:
    """``lambda_min((sum_i W_i^{-1})^{-1})`` for positive definite ``W_i`` with ``<W_i, rho_i> <= 1``.

    Only the states enter (through the precondition); the priors are never read.
    """
    if len(W) != len(e.states):
        raise ValueError("need one witness per state")
    check_witnesses(W, e.states, tol)
    total = 0
    for i, Wi in enumerate(W, 1):
        try:
            total = total + hermitian_inverse(Wi)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"W_{i} is not positive definite") from exc
    return 1.0 / float(np.linalg.eigvalsh(symmetrize(total))[-1])


def certificate_to_qsd_witness(cert: AliceCertificate, D: int) -> list[np.ndarray]:
    """``W_a = (D Z_a)^{-1}``; requires positive definite ``Z_a``."""
    out = []
    for a, Z in enumerate(cert.Z, 1):
        try:
            out.append(hermitian_inverse(D * np.asarray(Z)))
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"Z_{a} is not positive definite") from exc
    return out


def purified_protocol(e: QsdEnsemble) -> DricProtocol:
    """Commitment protocol whose reduced states are the ensemble (canonical purifications)."""
    states = []
    for rho in e.states:
        w, V = np.linalg.eigh(symmetrize(rho))
        root = (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T
        # |psi> = sum_ij sqrt(rho)_{ij} |j>_A |i>_B  so that Tr_A = sqrt(rho) sqrt(rho)^H
        psi = root.T.reshape(-1)
        states.append(psi / np.linalg.norm(psi))
    return DricProtocol(e.n, BipartiteDims(e.dim, e.dim), tuple(states), "purified-ensemble", {"kind": "purified"})


def purification_witnesses(e: QsdEnsemble, eps: float = 1e-9) -> list[np.ndarray]:
    """Witnesses from an optimal Alice certificate of the purified protocol.

    Each ``Z_a`` is regularised by ``eps I``; witnesses are rescaled where
    needed so that ``<W_a, rho_a> <= 1`` holds exactly.
    """
    p = purified_protocol(e)
    cert = solve_alice(p).certificate
    n = e.dim
    Z = [Za + eps * np.eye(n) for Za in cert.Z]
    W = certificate_to_qsd_witness(AliceCertificate(cert.s + eps * e.n, Z, "operator"), e.n)
    return [Wi / max(1.0, inner(Wi, rho)) for Wi, rho in zip(W, e.states)]


def random_state(rng: np.random.Generator, dim: int, rank: int | None = None, real: bool = False) -> np.ndarray:
    """Mixture of ``rank`` Haar-random pure states with uniform-Dirichlet weights."""
    rank = dim if rank is None else rank
    G = rng.normal(size=(dim, rank))
    if not real:
        G = G + 1j * rng.normal(size=(dim, rank))
    G /= np.linalg.norm(G, axis=0)
    w = rng.dirichlet(np.ones(rank))
    rho = (G * w) @ G.conj().T
    return (rho + rho.conj().T) / 2


def random_ensemble(rng: np.random.Generator, n: int, dim: int) -> QsdEnsemble:
    states = tuple(random_state(rng, dim, int(rng.integers(1, dim + 1))) for _ in range(n))
    priors = rng.dirichlet(np.ones(n))
    priors = tuple(priors / priors.sum())
    return QsdEnsemble(states, priors)


def random_witnesses(rng: np.random.Generator, e: QsdEnsemble) -> list[np.ndarray]:
    """Random positive definite ``W_i`` scaled to ``<W_i, rho_i> = 1``."""
    out = []
    for rho in e.states:
        G = rng.normal(size=(e.dim, e.dim)) + 1j * rng.normal(size=(e.dim, e.dim))
        W = G @ G.conj().T + 0.1 * np.eye(e.dim)
        out.append(W / inner(W, rho))
    return out
