"""Dense complex-Hermitian linear algebra used throughout the package.

Bipartite spaces use the composite index ``i = iA * dimB + iB``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class BipartiteDims:
    dimA: int
    dimB: int

    def __post_init__(self):
        if self.dimA < 1 or self.dimB < 1:
            raise ValueError(f"dimensions must be positive, got {self.dimA}x{self.dimB}")

    @property
    def total(self) -> int:
        return self.dimA * self.dimB


@dataclass(frozen=True)
class PsdReport:
    certified: bool
    lambda_min: float
    tol: float

    def __bool__(self):
        return self.certified


def as_matrix(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def hermitian_defect(A: np.ndarray) -> float:
    return float(np.max(np.abs(A - dagger(A)))) if A.size else 0.0


def symmetrize(A, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``(A + A^†)/2``, refusing inputs that are visibly non-Hermitian.

    The allowed defect is ``tol * max(1, ||A||_F)``.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got {A.shape}")
    scale = max(1.0, float(np.linalg.norm(A)))
    defect = hermitian_defect(A)
    if defect > tol * scale:
        raise ValueError(f"matrix is not Hermitian (max |A - A^H| = {defect:.3e})")
    return (A + dagger(A)) / 2


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A), as_matrix(B))


def _check_square(M: np.ndarray, n: int):
    if M.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {M.shape}")


def partial_trace_A(M, dims: BipartiteDims) -> np.ndarray:
    """Trace out the first factor of an operator on A (x) B."""
    M = as_matrix(M)
    _check_square(M, dims.total)
    T = M.reshape(dims.dimA, dims.dimB, dims.dimA, dims.dimB)
    return np.einsum("ajak->jk", T)


def partial_trace_B(M, dims: BipartiteDims) -> np.ndarray:
    M = as_matrix(M)
    _check_square(M, dims.total)
    T = M.reshape(dims.dimA, dims.dimB, dims.dimA, dims.dimB)
    return np.einsum("ajbj->ab", T)


def reduce_pure_A(psi, dims: BipartiteDims) -> np.ndarray:
    """``Tr_A |psi><psi|`` computed from the amplitudes, never forming the outer product."""
    psi = np.asarray(psi)
    if psi.shape != (dims.total,):
        raise ValueError(f"state has shape {psi.shape}, expected ({dims.total},)")
    T = psi.reshape(dims.dimA, dims.dimB)
    return T.T @ T.conj()


def eigh(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix."""
    H = symmetrize(A)
    w, V = np.linalg.eigh(H)
    return w, V


def eigvalsh(A) -> np.ndarray:
    return np.linalg.eigvalsh(symmetrize(A))


def default_psd_tol(A) -> float:
    A = np.asarray(A)
    return 1e-9 * A.shape[0] * max(1.0, float(np.linalg.norm(A)))


def psd_check(A, tol: float | None = None) -> PsdReport:
    """Certify ``A >= 0`` up to ``-tol`` on the smallest eigenvalue."""
    A = as_matrix(A)
    if tol is None:
        tol = default_psd_tol(A)
    if A.shape[0] == 0:
        return PsdReport(True, 0.0, tol)
    lmin = float(eigvalsh(A)[0])
    return PsdReport(lmin >= -tol, lmin, tol)


def inner(A, B) -> float:
    """Real Hilbert-Schmidt inner product ``Re Tr(A^† B)``."""
    return float(np.real(np.vdot(np.asarray(A), np.asarray(B))))


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi)
    return np.outer(psi, psi.conj())


def hermitian_inverse(A) -> np.ndarray:
    """Inverse of a positive definite matrix; raises ``LinAlgError`` otherwise."""
    H = symmetrize(A)
    L = np.linalg.cholesky(H)
    Linv = np.linalg.solve(L, np.eye(H.shape[0], dtype=L.dtype))
    return dagger(Linv) @ Linv
