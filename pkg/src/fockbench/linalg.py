"""Dense and sparse eigen-solvers used by the checks."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# dense path up to this size, Lanczos above (dense costs O(n^3) with a large constant)
DENSE_LIMIT = 600
# cyclic Jacobi is O(n^3) per sweep with Python-level rotations
JACOBI_LIMIT = 200


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with ascending eigenvalues and ``a @ v = v * w``.
    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||a||_F)``.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("jacobi_eigh needs a square matrix")
    if n and np.max(np.abs(a - a.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(a))):
        raise ValueError("jacobi_eigh needs a Hermitian matrix")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(1.0, np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.linalg.norm(a) ** 2 - np.sum(np.abs(np.diag(a)) ** 2), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2 * mag, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                # unitary on the (p, q) plane that zeroes a[p, q]
                rot = np.array([[c, s * phase], [-s * np.conj(phase), c]])
                cols = a[:, [p, q]] @ rot
                a[:, [p, q]] = cols
                a[[p, q], :] = rot.conj().T @ a[[p, q], :]
                v[:, [p, q]] = v[:, [p, q]] @ rot
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(a, method: str = "auto") -> np.ndarray:
    a = a.toarray() if sp.issparse(a) else np.asarray(a)
    if method == "jacobi" or (method == "auto" and a.shape[0] <= JACOBI_LIMIT):
        return jacobi_eigh(a)[0]
    return np.linalg.eigvalsh(a)


def generalized_lambda_max(a, b) -> float:
    """Largest ``λ`` with ``a† a x = λ b x`` for Hermitian positive definite ``b``.

    Dense path: Cholesky ``b = r† r`` then the largest squared singular value
    of ``a r^{-1}``.  Large sparse problems go through Lanczos on the same
    reduced operator, with the triangular solves replaced by a sparse LU.
    """
    n = b.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"column count {a.shape[1]} does not match metric size {n}")
    if a.shape[0] == 0 or n == 0:
        return 0.0
    if sp.issparse(a) and a.nnz == 0:
        return 0.0
    if n <= DENSE_LIMIT:
        bd = b.toarray() if sp.issparse(b) else np.asarray(b)
        ad = a.toarray() if sp.issparse(a) else np.asarray(a)
        if not np.any(ad):
            return 0.0
        r = sla.cholesky(bd, lower=False)
        if ad.shape[0] < n:
            # a r^{-1}: solve r^T y^T = a^T, then the smaller Gram matrix y y†
            y = sla.solve_triangular(r, ad.conj().T, trans="C", lower=False).conj().T
            gram = y @ y.conj().T
        else:
            # r^{-†} (a†a) r^{-1} by two triangular solves
            m = ad.conj().T @ ad
            c = sla.solve_triangular(r, m, trans="C", lower=False)
            gram = sla.solve_triangular(r, c.conj().T, trans="C", lower=False)
            gram = 0.5 * (gram + gram.conj().T)
        return float(max(sla.eigvalsh(gram, subset_by_index=[gram.shape[0] - 1] * 2)[0], 0.0))
    return _lanczos_lambda_max(sp.csr_matrix(a), sp.csc_matrix(b))


def _lanczos_lambda_max(a: sp.csr_matrix, b: sp.csc_matrix) -> float:
    if a.nnz == 0:
        return 0.0
    solve = spla.splu(sp.csc_matrix(b, dtype=complex)).solve
    ah = a.conj().T.tocsr()
    n = b.shape[0]

    def op(x):
        return solve(ah @ (a @ x))

    # b^{-1} a†a is self-adjoint in the b inner product
    lin = spla.LinearOperator((n, n), matvec=op, dtype=complex)
    vals = spla.eigs(lin, k=1, which="LR", tol=1e-10, v0=np.ones(n, dtype=complex))[0]
    return float(max(vals.real[0], 0.0))


def spectral_norm(a) -> float:
    """Operator 2-norm."""
    if min(a.shape) == 0:
        return 0.0
    if sp.issparse(a):
        if a.nnz == 0:
            return 0.0
        if min(a.shape) <= DENSE_LIMIT:
            a = a.toarray()
        else:
            return float(spla.svds(a, k=1, return_singular_vectors=False, tol=1e-10)[0])
    return float(np.linalg.norm(a, 2))


def scaling_fit(xs, ys) -> tuple[float, float, float]:
    """Least squares of ``log y`` on ``log x``; returns ``(slope, intercept, rms residual)``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("xs and ys must be 1-d arrays of equal length")
    if xs.size < 3:
        raise ValueError(f"scaling_fit needs at least 3 points, got {xs.size}")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("scaling_fit needs strictly positive xs and ys")
    lx, ly = np.log(xs), np.log(ys)
    if np.ptp(lx) < 1e-12:
        raise ValueError("degenerate x range")
    design = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    resid = ly - design @ np.array([slope, intercept])
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))
