"""Standard-form semidefinite programs over block-diagonal Hermitian variables.

Primal::

    maximize   <C, X>
    subject to A(X) = b,  X >= 0

Dual::

    minimize   <b, y>
    subject to S = A*(y) - C >= 0

Every constraint is a sum of *terms*, one per variable block.  A term is
either a partial trace ``X -> Tr_A(X)`` (coordinates taken in an
orthonormal Hermitian basis of the output space) or an explicit list of
dense Hermitian matrices.  Partial-trace terms let the Schur complement be
assembled by tensor contraction instead of one dense product per row,
which is what keeps the cheating SDPs cheap.

The solver is a dense infeasible-start primal-dual path-following method
with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps

from .matlin import BipartiteDims, dagger, symmetrize

log = logging.getLogger(__name__)

GAP_TARGET = 1e-8
MAX_ITERS = 200
FEAS_TOL = 1e-9


# --------------------------------------------------------------------------
# Hermitian coordinates


@lru_cache(maxsize=64)
def hermitian_basis(n: int, real: bool) -> sps.csc_matrix:
    """Orthonormal basis of n x n Hermitian (``real``: symmetric) matrices.

    Column ``k`` is the row-major vectorisation of the k-th basis matrix.
    Order: diagonal units, then symmetric pairs, then (complex only)
    antisymmetric imaginary pairs, each pair list in row-major ``i < j``.
    """
    rows, cols, vals = [], [], []
    k = 0
    for i in range(n):
        rows.append(i * n + i)
        cols.append(k)
        vals.append(1.0)
        k += 1
    r2 = 1 / np.sqrt(2)
    iu, ju = np.triu_indices(n, 1)
    for i, j in zip(iu, ju):
        rows += [i * n + j, j * n + i]
        cols += [k, k]
        vals += [r2, r2]
        k += 1
    if not real:
        for i, j in zip(iu, ju):
            rows += [i * n + j, j * n + i]
            cols += [k, k]
            vals += [1j * r2, -1j * r2]
            k += 1
    dtype = float if real else complex
    B = sps.csc_matrix((np.array(vals, dtype=dtype), (rows, cols)), shape=(n * n, k))
    return B


def basis_size(n: int, real: bool) -> int:
    return n * (n + 1) // 2 if real else n * n


def to_coords(Y, real: bool) -> np.ndarray:
    Y = np.asarray(Y)
    n = Y.shape[0]
    B = hermitian_basis(n, real)
    v = B.conj().T @ Y.reshape(-1)
    return np.real(v)


def from_coords(v, n: int, real: bool) -> np.ndarray:
    B = hermitian_basis(n, real)
    return (B @ np.asarray(v, dtype=float)).reshape(n, n)


# --------------------------------------------------------------------------
# Constraint terms


@dataclass(frozen=True)
class PartialTraceTerm:
    """``coef * coords(Tr_A(X_block))`` written into ``rows``."""

    block: int
    dims: BipartiteDims
    rows: slice
    coef: float = 1.0

    @property
    def size(self) -> int:
        return self.rows.stop - self.rows.start

    def apply(self, X: np.ndarray, real: bool) -> np.ndarray:
        a, b = self.dims.dimA, self.dims.dimB
        Y = np.einsum("ajak->jk", X.reshape(a, b, a, b))
        return self.coef * to_coords(Y, real)

    def adjoint(self, v: np.ndarray, real: bool) -> np.ndarray:
        Y = from_coords(v, self.dims.dimB, real)
        if self.dims.dimA == 1:
            return self.coef * Y
        return self.coef * np.kron(np.eye(self.dims.dimA), Y)

    def norm(self) -> float:
        return abs(self.coef) * np.sqrt(self.dims.dimA)


@dataclass(frozen=True)
class DenseTerm:
    """``coef * [<A_i, X_block>]_i`` for explicit Hermitian ``mats[i]``."""

    block: int
    mats: np.ndarray
    rows: slice
    coef: float = 1.0

    @property
    def size(self) -> int:
        return self.rows.stop - self.rows.start

    def apply(self, X: np.ndarray, real: bool) -> np.ndarray:
        return self.coef * np.real(np.einsum("kij,ij->k", self.mats.conj(), X))

    def adjoint(self, v: np.ndarray, real: bool) -> np.ndarray:
        return self.coef * np.einsum("k,kij->ij", v, self.mats)

    def norm(self) -> float:
        return abs(self.coef) * float(np.max(np.linalg.norm(self.mats, axis=(1, 2))))


def _pt_pair_schur(t1: PartialTraceTerm, t2: PartialTraceTerm, W, real: bool):
    a1, b1 = t1.dims.dimA, t1.dims.dimB
    a2, b2 = t2.dims.dimA, t2.dims.dimB
    # L[p,q,r,s] = sum_{x,y} W[(x,p),(y,r)] W[(y,s),(x,q)]
    if a1 == 1 and a2 == 1:
        L = np.einsum("pr,sq->pqrs", W, W)
    else:
        Wa = W.reshape(a1, b1, a2, b2)
        Wb = W.reshape(a2, b2, a1, b1)
        L = np.einsum("xpyr,ysxq->pqrs", Wa, Wb, optimize=True)
    L = L.reshape(b1 * b1, b2 * b2)
    B1 = hermitian_basis(b1, real)
    B2 = hermitian_basis(b2, real)
    LB2 = (B2.T @ L.T).T
    return np.real(B1.conj().T @ LB2)


def _generic_pair_schur(t1, t2, W, real: bool, n: int):
    out = np.empty((t1.size, t2.size))
    for j in range(t2.size):
        e = np.zeros(t2.size)
        e[j] = 1.0
        A = t2.adjoint(e, real) / t2.coef
        out[:, j] = t1.apply(W @ A @ W, real) / t1.coef
    return out


# --------------------------------------------------------------------------
# Problem


@dataclass(frozen=True)
class SdpProblem:
    """Block SDP in standard form; see the module docstring for conventions."""

    block_sizes: tuple
    C: tuple
    terms: tuple
    b: np.ndarray
    real: bool = True
    labels: dict = field(default_factory=dict, compare=False)

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def n_total(self) -> int:
        return int(sum(self.block_sizes))

    def terms_on(self, k: int):
        return [t for t in self.terms if t.block == k]

    def apply(self, X) -> np.ndarray:
        out = np.zeros(self.m)
        for t in self.terms:
            out[t.rows] += t.apply(X[t.block], self.real)
        return out

    def adjoint(self, y) -> list:
        dtype = float if self.real else complex
        out = [np.zeros((n, n), dtype=dtype) for n in self.block_sizes]
        for t in self.terms:
            out[t.block] = out[t.block] + t.adjoint(y[t.rows], self.real)
        return out

    def objective(self, X) -> float:
        return float(sum(np.real(np.vdot(C, Xk)) for C, Xk in zip(self.C, X)))

    def schur(self, W) -> np.ndarray:
        """``M[i, j] = <A_i, W A_j W>`` for block scalings ``W``."""
        M = np.zeros((self.m, self.m))
        for k, n in enumerate(self.block_sizes):
            terms = self.terms_on(k)
            cache = {}
            for i, t1 in enumerate(terms):
                for t2 in terms[i:]:
                    if isinstance(t1, PartialTraceTerm) and isinstance(t2, PartialTraceTerm):
                        key = (t1.dims, t2.dims)
                        if key not in cache:
                            cache[key] = _pt_pair_schur(t1, t2, W[k], self.real)
                        blk = cache[key]
                    else:
                        blk = _generic_pair_schur(t1, t2, W[k], self.real, n)
                    blk = t1.coef * t2.coef * blk
                    M[t1.rows, t2.rows] += blk
                    if t1 is not t2:
                        M[t2.rows, t1.rows] += blk.T
        return M

    def check_rank(self) -> float:
        """Smallest eigenvalue of the constraint Gram matrix; raises if rank deficient."""
        G = self.schur([np.eye(n) for n in self.block_sizes])
        lmin = float(np.linalg.eigvalsh(G)[0]) if self.m else 1.0
        if lmin <= 1e-10 * max(1.0, float(np.max(np.abs(G)))):
            raise ValueError(f"constraint maps are linearly dependent (lambda_min = {lmin:.3e})")
        return lmin


class SdpBuilder:
    """Incremental construction of an :class:`SdpProblem`."""

    def __init__(self, real: bool = True):
        self.real = real
        self.block_sizes = []
        self.C = []
        self.terms = []
        self.b = []
        self.labels = {}

    def add_block(self, n: int, C=None, label: str | None = None) -> int:
        dtype = float if self.real else complex
        C = np.zeros((n, n), dtype=dtype) if C is None else symmetrize(C)
        if self.real:
            if np.iscomplexobj(C):
                if np.max(np.abs(C.imag), initial=0.0) > 0:
                    raise ValueError("complex objective in a real problem")
                C = C.real
        C = np.asarray(C, dtype=dtype)
        self.block_sizes.append(n)
        self.C.append(C)
        k = len(self.block_sizes) - 1
        if label:
            self.labels[label] = k
        return k

    def _rows(self, size: int) -> slice:
        start = len(self.b)
        return slice(start, start + size)

    def add_partial_trace_constraint(self, parts, rhs) -> slice:
        """``sum coef * Tr_A(X_block) = rhs`` over ``parts = [(block, dims, coef)]``."""
        rhs = np.asarray(rhs)
        n = rhs.shape[0]
        rows = self._rows(basis_size(n, self.real))
        for block, dims, coef in parts:
            if dims.total != self.block_sizes[block] or dims.dimB != n:
                raise ValueError("term dimensions do not match block/rhs")
            self.terms.append(PartialTraceTerm(block, dims, rows, float(coef)))
        self.b.extend(to_coords(rhs, self.real))
        return rows

    def add_dense_constraints(self, parts, rhs) -> slice:
        """``sum_blocks <A_i^block, X_block> = rhs_i`` with ``parts = [(block, mats)]``."""
        rhs = np.asarray(rhs, dtype=float).reshape(-1)
        rows = self._rows(len(rhs))
        for block, mats in parts:
            mats = np.asarray(mats)
            if self.real:
                mats = np.real(mats)
            self.terms.append(DenseTerm(block, mats, rows))
        self.b.extend(rhs)
        return rows

    def build(self, check_rank: bool = True) -> SdpProblem:
        prob = SdpProblem(
            tuple(self.block_sizes),
            tuple(self.C),
            tuple(self.terms),
            np.asarray(self.b, dtype=float),
            self.real,
            dict(self.labels),
        )
        if check_rank:
            prob.check_rank()
        return prob


# --------------------------------------------------------------------------
# Solution and verification


@dataclass(frozen=True)
class SdpSolution:
    X: list
    y: np.ndarray
    S: list
    primal_value: float
    dual_value: float
    gap: float
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float

    @property
    def value(self) -> float:
        return 0.5 * (self.primal_value + self.dual_value)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


@dataclass(frozen=True)
class PairReport:
    gap: float
    primal_residual: float
    primal_margin: float
    dual_margin: float
    primal_ok: bool
    dual_ok: bool
    primal_value: float
    dual_value: float


def _min_eig(blocks) -> float:
    vals = [np.linalg.eigvalsh(symmetrize(B))[0] for B in blocks if B.shape[0]]
    return float(min(vals)) if vals else 0.0


def verify_feasible_pair(prob: SdpProblem, X, y, tol: float = 1e-9, feas_tol: float = 1e-8) -> PairReport:
    """Check a candidate primal/dual pair directly against the problem data.

    Does not touch solver state: only ``A``, ``A*``, ``C`` and ``b`` are used.
    """
    X = [np.asarray(B) for B in X]
    y = np.asarray(y, dtype=float)
    res = float(np.linalg.norm(prob.apply(X) - prob.b))
    S = [A - C for A, C in zip(prob.adjoint(y), prob.C)]
    pm = _min_eig(X)
    dm = _min_eig(S)
    pval = prob.objective(X)
    dval = float(prob.b @ y)
    primal_ok = res <= feas_tol * (1 + np.linalg.norm(prob.b)) and pm >= -tol
    return PairReport(dval - pval, res, pm, dm, bool(primal_ok), bool(dm >= -tol), pval, dval)


# --------------------------------------------------------------------------
# Interior point solver


class _Factor:
    def __init__(self, M):
        try:
            self.kind = "chol"
            self.f = sla.cho_factor(M, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            self.kind = "lu"
            self.f = sla.lu_factor(M, check_finite=False)

    def solve(self, r):
        if self.kind == "chol":
            return sla.cho_solve(self.f, r, check_finite=False)
        return sla.lu_solve(self.f, r, check_finite=False)


def _nt_scaling(X, Z):
    Lx = np.linalg.cholesky(X)
    Lz = np.linalg.cholesky(Z)
    try:
        U, s, Vh = sla.svd(dagger(Lz) @ Lx, check_finite=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        U, s, Vh = sla.svd(dagger(Lz) @ Lx, check_finite=False, lapack_driver="gesvd")
    R = Lx @ dagger(Vh) / np.sqrt(s)
    Rinv = (dagger(U) @ dagger(Lz)) / np.sqrt(s)[:, None]
    return R, Rinv, s


def _max_step(lam, D) -> float:
    """Largest alpha with diag(lam) + alpha * D >= 0."""
    r = 1 / np.sqrt(lam)
    ev = np.linalg.eigvalsh(symmetrize(D * r[:, None] * r[None, :], tol=1e-6))[0]
    return np.inf if ev >= 0 else -1.0 / ev


def _herm(A):
    return (A + dagger(A)) / 2


def solve(
    prob: SdpProblem,
    gap_target: float = GAP_TARGET,
    max_iters: int = MAX_ITERS,
    feas_tol: float = FEAS_TOL,
) -> SdpSolution:
    """Solve ``prob`` to relative duality gap ``gap_target``.

    Internally works with ``min <-C, X>`` and dual multipliers of opposite
    sign; results are reported in the maximisation picture.
    """
    dtype = float if prob.real else complex
    nb = len(prob.block_sizes)
    Ct = [-C for C in prob.C]
    b = prob.b
    normb = np.linalg.norm(b)
    normC = np.sqrt(sum(np.linalg.norm(C) ** 2 for C in prob.C))

    # infeasible start, scaled to the data
    X, Z = [], []
    for k, n in enumerate(prob.block_sizes):
        tn = [t.norm() for t in prob.terms_on(k)] or [1.0]
        tb = [np.max(1 + np.abs(b[t.rows]), initial=1.0) for t in prob.terms_on(k)] or [1.0]
        xi = max(10.0, np.sqrt(n), np.sqrt(n) * max(tb_ / (1 + tn_) for tb_, tn_ in zip(tb, tn)))
        eta = max(10.0, np.sqrt(n), max(tn), float(np.linalg.norm(prob.C[k])))
        X.append(xi * np.eye(n, dtype=dtype))
        Z.append(eta * np.eye(n, dtype=dtype))
    y = np.zeros(prob.m)
    n_total = prob.n_total

    status = "max_iters"
    it = 0
    for it in range(1, max_iters + 1):
        AX = prob.apply(X)
        rp = b - AX
        Aty = prob.adjoint(y)
        Rd = [Ct[k] - Z[k] - Aty[k] for k in range(nb)]
        pobj = -prob.objective(X)
        dobj = float(b @ y)
        mu = sum(np.real(np.vdot(X[k], Z[k])) for k in range(nb)) / n_total
        pinf = np.linalg.norm(rp) / (1 + normb)
        dinf = np.sqrt(sum(np.linalg.norm(R) ** 2 for R in Rd)) / (1 + normC)
        rel_gap = abs(pobj - dobj) / (1 + abs(pobj))
        log.debug("it %3d pobj %.10e dobj %.10e gap %.2e pinf %.2e dinf %.2e mu %.2e",
                  it, -pobj, -dobj, rel_gap, pinf, dinf, mu)
        if rel_gap <= gap_target and pinf <= feas_tol and dinf <= feas_tol:
            status = "optimal"
            break
        if np.linalg.norm(y) > 1e12 or max(np.linalg.norm(Xk) for Xk in X) > 1e12:
            status = "infeasible_detected"
            break

        try:
            scal = [_nt_scaling(X[k], Z[k]) for k in range(nb)]
        except np.linalg.LinAlgError:
            status = "numerical_breakdown"
            break
        R = [s[0] for s in scal]
        Rinv = [s[1] for s in scal]
        lam = [s[2] for s in scal]
        W = [R[k] @ dagger(R[k]) for k in range(nb)]
        M = prob.schur(W)
        if not np.all(np.isfinite(M)):
            status = "numerical_breakdown"
            break
        fac = _Factor(M)
        WRdW = [W[k] @ Rd[k] @ W[k] for k in range(nb)]

        def direction(rhs_scaled):
            # rhs_scaled[k]: right side of lam o (dx~ + dz~) in scaled space
            Rc = []
            for k in range(nb):
                lk = lam[k]
                rt = 2 * rhs_scaled[k] / (lk[:, None] + lk[None, :])
                Rc.append(R[k] @ rt @ dagger(R[k]))
            h = rp - prob.apply([Rc[k] - WRdW[k] for k in range(nb)])
            dy = fac.solve(h)
            Atdy = prob.adjoint(dy)
            dZ = [Rd[k] - Atdy[k] for k in range(nb)]
            dX = [_herm(Rc[k] - W[k] @ dZ[k] @ W[k]) for k in range(nb)]
            dZ = [_herm(D) for D in dZ]
            dxs = [Rinv[k] @ dX[k] @ dagger(Rinv[k]) for k in range(nb)]
            dzs = [dagger(R[k]) @ dZ[k] @ R[k] for k in range(nb)]
            return dX, dy, dZ, dxs, dzs

        def steps(dxs, dzs):
            ap = min(_max_step(lam[k], dxs[k]) for k in range(nb))
            ad = min(_max_step(lam[k], dzs[k]) for k in range(nb))
            return ap, ad

        # predictor
        aff = [-np.diag(lk * lk).astype(dtype) for lk in lam]
        dX, dy, dZ, dxs, dzs = direction(aff)
        ap, ad = steps(dxs, dzs)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = sum(
            np.real(np.vdot(X[k] + ap * dX[k], Z[k] + ad * dZ[k])) for k in range(nb)
        ) / n_total
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0))

        # corrector
        cor = []
        for k in range(nb):
            prod = dxs[k] @ dzs[k]
            cor.append(aff[k] + sigma * mu * np.eye(len(lam[k])) - _herm(prod))
        dX, dy, dZ, dxs, dzs = direction(cor)
        ap, ad = steps(dxs, dzs)
        gamma = 0.9 + 0.09 * min(1.0, ap, ad)
        ap, ad = min(1.0, gamma * ap), min(1.0, gamma * ad)

        X = [_herm(X[k] + ap * dX[k]) for k in range(nb)]
        Z = [_herm(Z[k] + ad * dZ[k]) for k in range(nb)]
        y = y + ad * dy

    AX = prob.apply(X)
    yout = -y
    S = [_herm(A - C) for A, C in zip(prob.adjoint(yout), prob.C)]
    pval = prob.objective(X)
    dval = float(b @ yout)
    pres = float(np.linalg.norm(AX - b))
    dres = float(np.sqrt(sum(np.linalg.norm(S[k] - Z[k]) ** 2 for k in range(nb))))
    if status != "optimal":
        log.warning("SDP solve ended with status %s after %d iterations", status, it)
    return SdpSolution(X, yout, S, pval, dval, dval - pval, status, it, pres, dres)
