"""Sparse symmetric linear algebra kernels.

Everything here is a pure function of its inputs.  Systems are stored as
CSR matrices whose symmetry is enforced at assembly time, so downstream
solvers may rely on it without checking.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, NumericalError, SetupError, UsageError

SPD = "SPD"
SPSD = "SPSD"

#: dimension up to which the generalized eigensolver uses dense LAPACK
DENSE_EIG_LIMIT = 4096


def symmetrize(matrix):
    """Return a CSR matrix that is exactly symmetric.

    The upper triangle is kept and mirrored, so entries (i, j) and (j, i)
    are bitwise identical afterwards.
    """
    upper = sp.triu(sp.csr_matrix(matrix), k=0, format="csr")
    strict = sp.triu(upper, k=1, format="csr")
    out = (upper + strict.T).tocsr()
    out.sort_indices()
    out.eliminate_zeros()
    return out


@dataclass(frozen=True)
class SparseSystem:
    """Symmetric sparse matrix with a definiteness tag."""

    matrix: sp.csr_matrix
    definiteness: str = SPD

    def __post_init__(self):
        if self.definiteness not in (SPD, SPSD):
            raise UsageError(f"unknown definiteness tag {self.definiteness!r}")
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            raise UsageError(f"system must be square, got {m.shape}")
        if self.definiteness == SPD and np.any(m.diagonal() <= 0):
            raise SetupError("SPD system has a non-positive diagonal entry")

    @classmethod
    def assemble(cls, matrix, definiteness=SPD):
        """Build from any scipy sparse/dense matrix, enforcing symmetry."""
        return cls(symmetrize(matrix), definiteness)

    @classmethod
    def from_coo(cls, rows, cols, vals, n, definiteness=SPD):
        m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        return cls.assemble(m, definiteness)

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def __matmul__(self, x):
        return self.matrix @ x


@dataclass(frozen=True)
class EigenProblemPair:
    """Stiffness/mass pencil ``K y = lambda M y``."""

    stiffness: SparseSystem
    mass: SparseSystem

    def __post_init__(self):
        if self.stiffness.dimension != self.mass.dimension:
            raise UsageError("stiffness and mass dimensions differ")
        if np.any(self.mass.matrix.diagonal() <= 0):
            raise SetupError("mass matrix must have a positive diagonal")

    @property
    def dimension(self):
        return self.stiffness.dimension


def jacobi_preconditioner(system):
    """Inverse of the diagonal as a callable ``r -> D^{-1} r``."""
    inv = 1.0 / system.matrix.diagonal()
    return lambda r: inv * r


def block_jacobi_preconditioner(system, labels):
    """Exact inverse of the block diagonal part of ``system``.

    Unknowns sharing a label form one block; couplings between different
    blocks are dropped.  Used for strongly anisotropic operators where a
    line of unknowns (a vertical fibre, a ring) is tightly coupled.
    """
    labels = np.asarray(labels)
    coo = system.matrix.tocoo()
    keep = labels[coo.row] == labels[coo.col]
    block = sp.csc_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])),
                          shape=coo.shape)
    lu = spla.splu(block, permc_spec="MMD_AT_PLUS_A")
    return lu.solve


def two_level_preconditioner(system, labels):
    """Block Jacobi plus an additive coarse correction on the blocks.

    The coarse space holds one piecewise-constant function per label, so
    modes that are nearly constant on each block (the slow ones for a
    strongly anisotropic operator) are solved for exactly.  The sum of two
    SPD operators keeps the preconditioner symmetric.
    """
    labels = np.asarray(labels)
    fine = block_jacobi_preconditioner(system, labels)
    uniq, inv = np.unique(labels, return_inverse=True)
    n = labels.size
    P = sp.csr_matrix((np.ones(n), (np.arange(n), inv)), shape=(n, uniq.size))
    coarse = (P.T @ system.matrix @ P).tocsc()
    lu = spla.splu(coarse, permc_spec="COLAMD")
    return lambda r: fine(r) + P @ lu.solve(P.T @ r)


def cg_solve(system, rhs, tol=1e-10, maxiter=None, preconditioner=None, x0=None):
    """Preconditioned conjugate gradients for an SPD system.

    Parameters
    ----------
    system : SparseSystem
    rhs : ndarray
    tol : float
        Target relative residual ``||b - A x|| / ||b||``.
    maxiter : int, optional
        Defaults to ``max(10 * n, 1000)``.
    preconditioner : callable, optional
        ``r -> M^{-1} r``; Jacobi when omitted.
    x0 : ndarray, optional

    Returns
    -------
    ndarray

    Raises
    ------
    ConvergenceError
        If the iteration cap is reached; ``.residual`` holds the final
        relative residual.
    """
    A = system.matrix
    b = np.asarray(rhs, dtype=float)
    n = A.shape[0]
    if b.shape != (n,):
        raise UsageError(f"rhs shape {b.shape} does not match dimension {n}")
    if not tol > 0:
        raise UsageError("tol must be positive")
    if maxiter is None:
        maxiter = max(10 * n, 1000)
    apply_m = preconditioner or jacobi_preconditioner(system)

    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    it = 0
    # outer loop re-seeds with the true residual if recurrence drift fools
    # the stopping test
    while True:
        z = apply_m(r)
        p = z.copy()
        rz = r @ z
        while np.linalg.norm(r) > tol * bnorm and it < maxiter:
            q = A @ p
            step = rz / (p @ q)
            x += step * p
            r -= step * q
            z = apply_m(r)
            rz_new = r @ z
            p *= rz_new / rz
            p += z
            rz = rz_new
            it += 1
        r = b - A @ x
        res = np.linalg.norm(r) / bnorm
        if res <= tol:
            return x
        if it >= maxiter:
            raise ConvergenceError(
                f"CG did not reach tol={tol:g} in {maxiter} iterations "
                f"(relative residual {res:.3e})", residual=res)


def _residual_check(K, M, lam, Y, rtol):
    """Per-pair residual ``||K y - lam M y||`` relative to the pair's scale.

    For (near-)null vectors ``||K y||`` is itself round-off, so the scale
    falls back to the backward-error norm ``||K||_1 ||y||``.
    """
    knorm = spla.norm(K, 1) if sp.issparse(K) else np.linalg.norm(K, 1)
    worst = 0.0
    for i, lam_i in enumerate(lam):
        y = Y[:, i]
        Ky = K @ y
        My = M @ y
        res = np.linalg.norm(Ky - lam_i * My)
        scale = max(np.linalg.norm(Ky), abs(lam_i) * np.linalg.norm(My))
        if scale <= 1e-6 * knorm * np.linalg.norm(y):
            scale = knorm * np.linalg.norm(y)
        worst = max(worst, res / scale)
    if worst > rtol:
        raise NumericalError(
            f"eigenpair residual {worst:.3e} exceeds {rtol:g}", residual=worst)
    return worst


def _mass_orthonormalize(K, M, lam, Y):
    """Rayleigh-Ritz on span(Y): exact M-orthonormality of the returned basis."""
    G = Y.T @ (M @ Y)
    H = Y.T @ (K @ Y)
    G = 0.5 * (G + G.T)
    H = 0.5 * (H + H.T)
    mu, C = scipy.linalg.eigh(H, G)
    return mu, Y @ C


def sym_gen_eig(pair, k, method="auto", shift=None, rtol=1e-8):
    """Smallest ``k`` eigenpairs of the symmetric pencil ``K y = lambda M y``.

    The mass matrix is factored (Cholesky inside LAPACK on the dense path,
    an explicit diagonal scaling on the sparse path) to reduce the pencil
    to a standard symmetric problem.

    Parameters
    ----------
    pair : EigenProblemPair
    k : int
    method : {"auto", "dense", "sparse"}
        ``auto`` is dense up to ``DENSE_EIG_LIMIT`` unknowns.
    shift : float, optional
        Shift for the sparse shift-invert Lanczos path.  The default -0.1
        keeps ``K - shift M`` SPD for any SPSD stiffness.
    rtol : float
        Residual acceptance threshold per pair.

    Returns
    -------
    eigenvalues : ndarray, ascending
    eigenvectors : ndarray, shape (n, k), M-orthonormal columns
    """
    n = pair.dimension
    if not 1 <= k <= n:
        raise UsageError(f"k={k} must lie in [1, {n}]")
    K = pair.stiffness.matrix
    M = pair.mass.matrix
    if method == "auto":
        method = "dense" if n <= DENSE_EIG_LIMIT else "sparse"

    if method == "dense":
        try:
            lam, Y = scipy.linalg.eigh(K.toarray(), M.toarray(),
                                       subset_by_index=[0, k - 1])
        except np.linalg.LinAlgError as exc:
            raise SetupError(f"mass matrix is not SPD: {exc}") from exc
    elif method == "sparse":
        d = M.diagonal()
        offdiag = M - sp.diags(d)
        if offdiag.count_nonzero():
            A, B = K, M
        else:
            s = 1.0 / np.sqrt(d)
            A = symmetrize(sp.diags(s) @ K @ sp.diags(s))
            B = None
        if shift is None:
            shift = -0.1
        ncv = min(n, max(2 * k + 1, 20))
        v0 = np.cos(np.arange(n) * 0.618) + 1.0
        lam, Y = spla.eigsh(A.tocsc(), k=k, M=B, sigma=shift, which="LM",
                            v0=v0, ncv=ncv, tol=1e-14)
        if B is None:
            Y = s[:, None] * Y
        order = np.argsort(lam)
        lam, Y = lam[order], Y[:, order]
    else:
        raise UsageError(f"unknown eigensolver method {method!r}")

    lam, Y = _mass_orthonormalize(K, M, lam, Y)
    _residual_check(K, M, lam, Y, rtol)
    return lam, Y


def periodic_mean(values, axis=-1):
    """Trapezoid average over one period of a uniformly sampled function.

    On a periodic uniform grid the trapezoid rule reduces to the sample mean
    and is spectrally accurate for smooth integrands.
    """
    return np.mean(values, axis=axis)
