"""Weighted eigenproblem ``-div_S(a grad_S u) = lambda a u`` on S^1 and S^2.

The stiffness matrix comes from a conservative flux discretization: each
grid face contributes ``a_face * (u_b - u_a)^2 * length / distance`` to the
Dirichlet energy, so the assembled matrix is symmetric positive
semidefinite by construction and annihilates constants.  The mass matrix is
diagonal, ``a_i`` times the cell measure.  Both are normalized by the total
sphere measure so that the inner product is an average.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InapplicableError, NumericalError, UsageError
from .geometry import Weight, build_weight
from .numerics import SPD, SPSD, EigenProblemPair, SparseSystem, sym_gen_eig

#: eigenvalues below this are treated as the constant mode
ZERO_EIGENVALUE = 1e-8
#: relative gap below which eigenvalues are reported as one eigenspace
CLUSTER_RTOL = 1e-7
#: relative asymmetry threshold for parity tags
PARITY_TOL = 1e-6


def _faces(weight):
    """Face list ``(a_idx, b_idx, conductance)`` of the sphere grid.

    Conductance is ``a(face) * length / distance`` divided by the total
    measure of the sphere.
    """
    if weight.n == 3:
        N = weight.shape[0]
        h = 2.0 * np.pi / N
        j = np.arange(N)
        a_face = weight.evaluate(weight.theta + 0.5 * h)
        return j, (j + 1) % N, a_face / (h * 2.0 * np.pi)

    n_lat, n_lon = weight.shape
    dphi = np.pi / n_lat
    dth = 2.0 * np.pi / n_lon
    phi = weight.phi
    theta = weight.theta
    total = n_lon * dth * dphi * np.sin(phi).sum()
    idx = np.arange(n_lat * n_lon).reshape(n_lat, n_lon)

    # faces between latitude rings i and i+1 (none at the poles)
    phi_f = (np.arange(1, n_lat)) * dphi
    Pf, Tf = np.meshgrid(phi_f, theta, indexing="ij")
    c_lat = weight.evaluate(Tf, Pf) * np.sin(Pf) * dth / dphi
    a_lat, b_lat = idx[:-1, :].ravel(), idx[1:, :].ravel()

    # faces between longitudes j and j+1, periodic
    Pc, Tc = np.meshgrid(phi, theta + 0.5 * dth, indexing="ij")
    c_lon = weight.evaluate(Tc, Pc) * dphi / (np.sin(Pc) * dth)
    a_lon, b_lon = idx.ravel(), np.roll(idx, -1, axis=1).ravel()

    return (np.concatenate([a_lat, a_lon]),
            np.concatenate([b_lat, b_lon]),
            np.concatenate([c_lat.ravel(), c_lon.ravel()]) / total)


def _cell_measure(weight):
    if weight.n == 3:
        return np.full(weight.size, 1.0 / weight.size)
    n_lat, n_lon = weight.shape
    m = np.repeat(np.sin(weight.phi), n_lon)
    return m / m.sum()


def assemble_pencil(weight):
    """Stiffness/mass pair for the weighted Laplace-Beltrami problem."""
    a_idx, b_idx, cond = _faces(weight)
    n = weight.size
    rows = np.concatenate([a_idx, b_idx, a_idx, b_idx])
    cols = np.concatenate([a_idx, b_idx, b_idx, a_idx])
    vals = np.concatenate([cond, cond, -cond, -cond])
    K = SparseSystem.from_coo(rows, cols, vals, n, SPSD)
    B = SparseSystem.assemble(sp.diags(weight.samples.ravel() * _cell_measure(weight)), SPD)
    return EigenProblemPair(K, B)


def _flat(u, weight, name="u"):
    u = np.asarray(u, dtype=float)
    if u.shape == tuple(weight.shape):
        return u.ravel()
    if u.shape == (weight.size,):
        return u
    raise UsageError(f"{name} has shape {u.shape}, grid is {weight.shape}")


def weighted_inner(u, v, weight):
    """Normalized ``a``-weighted average of ``u v`` over the sphere."""
    uf = _flat(u, weight, "u")
    vf = _flat(v, weight, "v")
    return float(np.sum(weight.quadrature().ravel() * weight.samples.ravel() * uf * vf))


def rayleigh(u, weight, pencil=None):
    """Rayleigh quotient ``<a |grad u|^2> / <a u^2>`` with the solver's stencil."""
    uf = _flat(u, weight)
    pencil = pencil or assemble_pencil(weight)
    den = uf @ (pencil.mass.matrix @ uf)
    if den <= 0:
        raise UsageError("Rayleigh quotient of the zero function")
    return float(uf @ (pencil.stiffness.matrix @ uf) / den)


def cluster_eigenvalues(values, errors=None, rtol=CLUSTER_RTOL):
    """Group ascending eigenvalues into eigenspaces.

    Neighbours join a cluster when their gap is below ``rtol`` relative, or
    below the combined discretization error bars when those are given.

    Returns
    -------
    list of (start, stop) index pairs
    """
    values = np.asarray(values)
    errs = np.zeros_like(values) if errors is None else np.asarray(errors)
    clusters = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values):
            clusters.append((start, i))
            break
        gap = abs(values[i] - values[i - 1])
        scale = max(abs(values[i]), abs(values[i - 1]))
        if gap <= rtol * scale or gap <= 1e-12 or gap <= 2.0 * (errs[i] + errs[i - 1]):
            continue
        clusters.append((start, i))
        start = i
    return clusters


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenvalues and ``a``-orthonormal eigenfunctions on a sphere grid.

    ``eigenvalues`` are Richardson-extrapolated from the grid and its
    refinement when ``extrapolated`` is true; ``raw_eigenvalues`` are the
    values of the grid itself, which is where ``eigenfunctions`` live.
    """

    weight: Weight
    eigenvalues: np.ndarray
    raw_eigenvalues: np.ndarray
    error_bars: np.ndarray
    eigenfunctions: np.ndarray
    extrapolated: bool = False
    clusters: list = field(default_factory=list)

    @property
    def grid_size(self):
        return tuple(self.weight.shape)

    @property
    def lambda1_index(self):
        nz = np.nonzero(self.eigenvalues > ZERO_EIGENVALUE)[0]
        if nz.size == 0:
            raise NumericalError("no nonzero eigenvalue among the computed ones")
        return int(nz[0])

    @property
    def lambda1(self):
        return float(self.eigenvalues[self.lambda1_index])

    @property
    def lambda1_error(self):
        return float(self.error_bars[self.lambda1_index])

    @property
    def lambda1_cluster(self):
        i = self.lambda1_index
        for lo, hi in self.clusters:
            if lo <= i < hi:
                return lo, hi
        return i, i + 1

    @property
    def lambda1_multiplicity(self):
        lo, hi = self.lambda1_cluster
        return hi - lo

    def eigenfunction(self, k):
        """Samples of eigenfunction ``k`` shaped like the grid."""
        return self.eigenfunctions[:, k].reshape(self.weight.shape)


def _normalize_signs(Y):
    # deterministic sign: first entry of largest magnitude made positive
    for c in range(Y.shape[1]):
        i = np.argmax(np.abs(Y[:, c]) > 0.5 * np.abs(Y[:, c]).max())
        if Y[i, c] < 0:
            Y[:, c] = -Y[:, c]
    return Y


def _raw_spectrum(weight, k, method="auto"):
    pencil = assemble_pencil(weight)
    lam, Y = sym_gen_eig(pencil, k, method=method)
    return lam, _normalize_signs(Y)


def refine_weight(weight):
    shape = tuple(2 * s for s in weight.shape)
    return build_weight(weight.matrix, shape if weight.n == 4 else shape[0])


def solve_spectrum(weight, k=6, extrapolate=True, method="auto"):
    """Lowest ``k`` eigenpairs of the weighted sphere problem.

    Parameters
    ----------
    weight : Weight
    k : int
        Number of eigenpairs, ``k >= 2``.
    extrapolate : bool
        Also solve on the grid refined by two in every direction and report
        Richardson-extrapolated eigenvalues (the stencil is second order).
        The error bar is ``|lambda_2N - lambda_N| / 3``, the estimated error
        of the finer raw value.
    method : str
        Passed to :func:`gaplab.numerics.sym_gen_eig`.

    Returns
    -------
    SpectralBasis
    """
    if k < 2:
        raise UsageError("need k >= 2 to resolve lambda_1")
    if weight.n not in (3, 4):
        raise UsageError(f"spectra are supported for n in {{3, 4}}, got {weight.n}")
    lam, Y = _raw_spectrum(weight, k, method)
    if extrapolate:
        lam_fine, _ = _raw_spectrum(refine_weight(weight), k, method)
        corr = (lam_fine - lam) / 3.0
        values = lam_fine + corr
        errors = np.abs(corr)
    else:
        values = lam.copy()
        errors = np.zeros_like(lam)
    values[np.abs(values) < 1e-13] = 0.0
    clusters = cluster_eigenvalues(values, errors)
    return SpectralBasis(weight=weight, eigenvalues=values, raw_eigenvalues=lam,
                         error_bars=errors, eigenfunctions=Y,
                         extrapolated=extrapolate, clusters=clusters)


def reflection_permutation(weight, axis):
    """Index map of the reflection ``x_axis -> -x_axis`` (axis is 1-based)."""
    if not 1 <= axis <= weight.n - 1:
        raise UsageError(f"axis must be in 1..{weight.n - 1}")
    n_lon = weight.shape[-1]
    j = np.arange(n_lon)
    if weight.n == 3:
        return (n_lon // 2 - j) % n_lon if axis == 1 else (-j) % n_lon
    n_lat = weight.shape[0]
    idx = np.arange(n_lat * n_lon).reshape(n_lat, n_lon)
    if axis == 1:
        return idx[:, (n_lon // 2 - j) % n_lon].ravel()
    if axis == 2:
        return idx[:, (-j) % n_lon].ravel()
    return idx[::-1, :].ravel()


def _check_reflection_symmetric(weight, perm):
    a = weight.samples.ravel()
    if np.max(np.abs(a[perm] - a)) > 1e-12 * np.max(np.abs(a)):
        raise InapplicableError("weight is not symmetric under the requested reflection")


def _parity_tag(y, perm):
    norm = np.linalg.norm(y)
    if np.linalg.norm(y + y[perm]) <= PARITY_TOL * norm:
        return "odd"
    if np.linalg.norm(y - y[perm]) <= PARITY_TOL * norm:
        return "even"
    return "mixed"


def _adapted_cluster(basis, lo, hi, perm):
    """Rotate a cluster's basis to diagonalize the reflection."""
    Y = basis.eigenfunctions[:, lo:hi]
    mass = basis.weight.samples.ravel() * _cell_measure(basis.weight)
    P = Y.T @ (mass[:, None] * Y[perm])
    P = 0.5 * (P + P.T)
    s, C = np.linalg.eigh(P)
    return s, Y @ C


@dataclass(frozen=True)
class ParityReport:
    axis: int
    tags: list
    cluster_has_odd: list
    lambda1_has_odd: bool


def classify_parity(basis, axis):
    """Tag eigenfunctions odd/even/mixed under ``x_axis -> -x_axis``.

    Degenerate eigenspaces are first rotated to diagonalize the reflection,
    so the tags describe a symmetry-adapted basis of each eigenspace.

    Raises
    ------
    InapplicableError
        If the weight itself is not reflection symmetric.
    """
    perm = reflection_permutation(basis.weight, axis)
    _check_reflection_symmetric(basis.weight, perm)
    tags = [None] * basis.eigenfunctions.shape[1]
    has_odd = []
    for lo, hi in basis.clusters:
        s, Y = _adapted_cluster(basis, lo, hi, perm)
        has_odd.append(bool(np.any(s < -0.5)))
        for c in range(hi - lo):
            tags[lo + c] = _parity_tag(Y[:, c], perm)
    lo1, _ = basis.lambda1_cluster
    idx = [i for i, (lo, _) in enumerate(basis.clusters) if lo == lo1][0]
    return ParityReport(axis=axis, tags=tags, cluster_has_odd=has_odd,
                        lambda1_has_odd=has_odd[idx])


def odd_eigenfunction(basis, axis):
    """The ``lambda_1`` eigenfunction odd in ``x_axis``, positive where ``x_axis > 0``.

    Raises ``InapplicableError`` when the eigenspace contains no odd function.
    """
    perm = reflection_permutation(basis.weight, axis)
    _check_reflection_symmetric(basis.weight, perm)
    lo, hi = basis.lambda1_cluster
    s, Y = _adapted_cluster(basis, lo, hi, perm)
    odd = np.nonzero(s < -0.5)[0]
    if odd.size == 0:
        raise InapplicableError(f"lambda_1 eigenspace has no function odd in x_{axis}")
    y = Y[:, odd[0]]
    y = 0.5 * (y - y[perm])
    y /= np.sqrt(weighted_inner(y, y, basis.weight))
    coord = basis.weight.directions().reshape(-1, basis.weight.n - 1)[:, axis - 1]
    if np.sum(coord * y) < 0:
        y = -y
    return y.reshape(basis.weight.shape)
