"""Die-rolling protocols: integer-commitment state families and the classical subset protocol."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .matlin import BipartiteDims, reduce_pure_A

DIM_CAP = 512
NORM_TOL = 1e-12


def outcome(a: int, b: int, D: int) -> int:
    """Shared outcome for 1-based choices ``a, b``: ``((a-1) + (b-1)) mod D + 1``."""
    return (a - 1 + b - 1) % D + 1


def subsets(D: int, m: int) -> list[tuple[int, ...]]:
    """Lexicographically ordered m-subsets of ``{1, ..., D}``."""
    return list(itertools.combinations(range(1, D + 1), m))


def _check_dm(D: int, m: int):
    if D < 1 or not 1 <= m <= D:
        raise ValueError(f"need 1 <= m <= D, got D={D}, m={m}")


@dataclass(frozen=True, eq=False)
class DricProtocol:
    """Commitment protocol given by D pure states on A (x) B.

    Alice commits to ``a`` by preparing ``states[a-1]`` and sending B; she
    later reveals ``a`` and sends A, and Bob projects onto the state.
    ``meta`` records how the protocol was built (``kind``, ``m``, ...).
    """

    D: int
    dims: BipartiteDims
    states: tuple
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.states) != self.D:
            raise ValueError(f"expected {self.D} states, got {len(self.states)}")
        for a, psi in enumerate(self.states, 1):
            if psi.shape != (self.dims.total,):
                raise ValueError(f"state {a} has shape {psi.shape}")
            nrm = np.linalg.norm(psi)
            if abs(nrm - 1) > NORM_TOL:
                raise ValueError(f"state {a} has norm {nrm!r}")

    @property
    def is_real(self) -> bool:
        return all(not np.iscomplexobj(s) or not np.any(s.imag) for s in self.states)

    def acceptance(self, a: int) -> float:
        """Honest acceptance probability ``<psi_a| Pi_a |psi_a>``."""
        psi = self.states[a - 1]
        return float(abs(np.vdot(psi, psi)) ** 2)

    def gram(self) -> np.ndarray:
        S = np.array(self.states)
        return S.conj() @ S.T


def build_subset_protocol(D: int, m: int, dim_cap: int = DIM_CAP) -> DricProtocol:
    """States ``|psi_a> ∝ sum_{S ∋ a} |S>|S>`` over the m-subsets of [D]."""
    _check_dm(D, m)
    n = comb(D, m)
    if n > dim_cap:
        raise ValueError(f"C({D},{m}) = {n} exceeds the dimension cap {dim_cap}")
    T = subsets(D, m)
    norm = 1 / np.sqrt(comb(D - 1, m - 1))
    states = []
    for a in range(1, D + 1):
        psi = np.zeros(n * n)
        for i, S in enumerate(T):
            if a in S:
                psi[i * n + i] = norm
        states.append(psi)
    return DricProtocol(
        D, BipartiteDims(n, n), tuple(states), f"subset(D={D},m={m})", {"kind": "subset", "m": m}
    )


def reduced_states(p: DricProtocol) -> list[np.ndarray]:
    """``rho_a = Tr_A |psi_a><psi_a|`` for every a."""
    return [reduce_pure_A(psi, p.dims) for psi in p.states]


@dataclass(frozen=True)
class ClassicalSubsetProtocol:
    """Bob announces a random m-subset, Alice picks the outcome inside it."""

    D: int
    m: int

    def __post_init__(self):
        _check_dm(self.D, self.m)


def classical_cheat_values(p: ClassicalSubsetProtocol) -> tuple[Fraction, Fraction]:
    """Exact ``(P_A*, P_B*) = (m/D, 1/m)``."""
    return Fraction(p.m, p.D), Fraction(1, p.m)


@dataclass(frozen=True)
class HonestTranscript:
    a: int
    b: int
    d: int
    accepted: bool


@dataclass(frozen=True)
class HonestRun:
    histogram: np.ndarray
    transcripts: list

    @property
    def trials(self) -> int:
        return int(self.histogram.sum())

    @property
    def all_accepted(self) -> bool:
        return all(t.accepted for t in self.transcripts)


def simulate_honest(p, seed: int = 0, trials: int = 1000, keep: int | None = None) -> HonestRun:
    """Run ``trials`` honest executions; ``keep`` limits stored transcripts.

    For a :class:`DricProtocol`, ``a`` is Alice's commitment and ``b``
    Bob's reply.  For a :class:`ClassicalSubsetProtocol`, ``b`` is the index
    (1-based, lexicographic) of Bob's subset and ``a`` Alice's pick.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    D = p.D
    if isinstance(p, ClassicalSubsetProtocol):
        T = np.array(subsets(D, p.m))
        b = rng.integers(0, len(T), size=trials)
        pick = rng.integers(0, p.m, size=trials)
        d = T[b, pick]
        a = d
        b = b + 1
        # Bob's membership check
        accepted = (T[b - 1] == d[:, None]).any(axis=1)
    else:
        a = rng.integers(1, D + 1, size=trials)
        b = rng.integers(1, D + 1, size=trials)
        pacc = np.array([p.acceptance(k) for k in range(1, D + 1)])
        accepted = rng.random(trials) < pacc[a - 1]
        d = (a - 1 + b - 1) % D + 1
    hist = np.bincount(d[accepted], minlength=D + 1)[1:]
    n_keep = trials if keep is None else min(keep, trials)
    transcripts = [
        HonestTranscript(int(a[i]), int(b[i]), int(d[i]), bool(accepted[i])) for i in range(n_keep)
    ]
    return HonestRun(hist, transcripts)
