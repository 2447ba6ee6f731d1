"""Neck geometry of two nearly touching inclusions and the angular weight.

Near the closest point the lower and upper boundaries are graphs
``x_n = g(x')`` and ``x_n = eps + f(x')`` with the model family

    f - g = x'^T M x' + c4 |x'|^4,
    f = theta (f - g),   g = -(1 - theta) (f - g).

The weight ``a(xi) = xi^T M xi`` on the unit sphere of ``R^{n-1}`` drives
the angular eigenproblem.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, UsageError


def _as_matrix(hessian, n):
    M = np.atleast_2d(np.asarray(hessian, dtype=float))
    if M.shape != (n - 1, n - 1):
        raise GeometryError(f"hessian must be {(n - 1, n - 1)} for n={n}, got {M.shape}")
    return M


def check_spd(M, what="hessian"):
    """Raise ``GeometryError`` unless ``M`` is symmetric positive definite."""
    if not np.allclose(M, M.T, rtol=0, atol=1e-14 * max(1.0, np.abs(M).max())):
        raise GeometryError(f"{what} is not symmetric")
    eig = np.linalg.eigvalsh(0.5 * (M + M.T))
    if eig[0] <= 0:
        raise GeometryError(f"{what} is not positive definite (min eigenvalue {eig[0]:g})")
    return eig


@dataclass(frozen=True)
class GapGeometry:
    """The two-inclusion neck.

    Parameters
    ----------
    n : int
        Ambient dimension, ``n >= 2``.
    epsilon : float
        Distance between the inclusions.
    hessian : array_like
        ``(n-1, n-1)`` SPD matrix ``M`` with ``M_ij = d_ij(f - g)(0) / 2``.
    quartic_coeff : float
        ``c4`` in the perturbation ``c4 |x'|^4``.
    f_share : float
        Fraction of ``f - g`` carried by the upper boundary.
    R0 : float
        Neck half-width, in ``(0, 1]``.
    gamma : float
        Hoelder exponent of the boundary class (1 for the polynomial model).
    flat : bool
        Allow ``M = 0`` (parallel plates); used for sanity checks only.
    """

    n: int
    epsilon: float
    hessian: np.ndarray
    quartic_coeff: float = 0.0
    f_share: float = 0.5
    R0: float = 1.0
    gamma: float = 1.0
    flat: bool = False
    _eig: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise UsageError(f"dimension n must be an integer >= 2, got {self.n}")
        if not self.epsilon > 0:
            raise GeometryError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.R0 <= 1:
            raise GeometryError(f"R0 must lie in (0, 1], got {self.R0}")
        if not 0 <= self.f_share <= 1:
            raise GeometryError(f"f_share must lie in [0, 1], got {self.f_share}")
        if not 0 < self.gamma <= 1:
            raise GeometryError(f"gamma must lie in (0, 1], got {self.gamma}")
        M = _as_matrix(self.hessian, self.n)
        object.__setattr__(self, "hessian", M)
        if self.flat:
            if np.any(M != 0) or self.quartic_coeff != 0:
                raise GeometryError("flat geometry requires M = 0 and c4 = 0")
            object.__setattr__(self, "_eig", np.zeros(self.n - 1))
            return
        eig = check_spd(M)
        object.__setattr__(self, "_eig", eig)
        bound = -eig[0] / (8.0 * self.R0 ** 2)
        if self.quartic_coeff < bound:
            raise GeometryError(
                f"quartic_coeff={self.quartic_coeff:g} below {bound:g}: "
                "f - g would not stay positive on the neck")

    @classmethod
    def flat_gap(cls, n, epsilon, R0=1.0):
        return cls(n=n, epsilon=epsilon, hessian=np.zeros((n - 1, n - 1)), R0=R0, flat=True)

    @property
    def min_eig(self):
        return float(self._eig[0])

    @property
    def max_eig(self):
        return float(self._eig[-1])

    def with_epsilon(self, epsilon):
        return GapGeometry(self.n, epsilon, self.hessian, self.quartic_coeff,
                           self.f_share, self.R0, self.gamma, self.flat)

    # -- the boundary functions; x has shape (..., n-1) -------------------
    def separation(self, x):
        """``f - g`` at lateral points ``x``."""
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        q = np.einsum("...i,ij,...j->...", x, self.hessian, x)
        return q + self.quartic_coeff * r2 * r2

    def separation_grad(self, x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        return 2.0 * x @ self.hessian.T + 4.0 * self.quartic_coeff * r2[..., None] * x

    def upper(self, x):
        return self.f_share * self.separation(x)

    def lower(self, x):
        return -(1.0 - self.f_share) * self.separation(x)

    def upper_grad(self, x):
        return self.f_share * self.separation_grad(x)

    def lower_grad(self, x):
        return -(1.0 - self.f_share) * self.separation_grad(x)

    def delta(self, x):
        return self.epsilon + self.separation(x)


def gap_width(geom, x):
    """Vertical width ``eps + f(x') - g(x')`` of the neck at ``x'``.

    Raises ``UsageError`` for points with ``|x'| > 2 R0``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape[-1] != geom.n - 1:
        raise UsageError(f"point must have {geom.n - 1} components")
    if np.any(np.linalg.norm(x, axis=-1) > 2 * geom.R0 * (1 + 1e-14)):
        raise UsageError("point lies outside the neck |x'| <= 2 R0")
    out = geom.delta(x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Weight:
    """Samples of ``a(xi) = xi^T M xi`` on a sphere grid.

    For ``n = 3`` the grid is ``theta_j = 2 pi j / N``.  For ``n = 4`` it is
    a latitude-longitude grid with colatitudes offset half a cell from the
    poles: ``phi_i = (i + 1/2) pi / n_lat``, ``theta_j = 2 pi j / n_lon``.
    """

    n: int
    matrix: np.ndarray
    shape: tuple
    samples: np.ndarray

    @property
    def sphere_dim(self):
        return self.n - 2

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def theta(self):
        n_lon = self.shape[-1]
        return 2.0 * np.pi * np.arange(n_lon) / n_lon

    @property
    def phi(self):
        if self.n != 4:
            raise UsageError("colatitudes exist only for n = 4")
        n_lat = self.shape[0]
        return (np.arange(n_lat) + 0.5) * np.pi / n_lat

    def directions(self):
        """Unit vectors of the grid nodes, shape ``shape + (n-1,)``."""
        if self.n == 3:
            t = self.theta
            return np.stack([np.cos(t), np.sin(t)], axis=-1)
        P, T = np.meshgrid(self.phi, self.theta, indexing="ij")
        return np.stack([np.sin(P) * np.cos(T), np.sin(P) * np.sin(T), np.cos(P)], axis=-1)

    def evaluate(self, theta, phi=None):
        """``a`` at arbitrary angles (used for face-centred coefficients)."""
        return evaluate_weight(self.matrix, theta, phi)

    def quadrature(self):
        """Normalized quadrature weights (sum to one) on the grid."""
        if self.n == 3:
            return np.full(self.shape, 1.0 / self.shape[0])
        w = np.repeat(np.sin(self.phi)[:, None], self.shape[1], axis=1)
        return w / w.sum()

    def same_grid(self, other):
        return self.n == other.n and tuple(self.shape) == tuple(other.shape)


def evaluate_weight(M, theta, phi=None):
    M = np.asarray(M, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if M.shape == (2, 2):
        c, s = np.cos(theta), np.sin(theta)
        return M[0, 0] * c * c + (M[0, 1] + M[1, 0]) * c * s + M[1, 1] * s * s
    if M.shape == (3, 3):
        if phi is None:
            raise UsageError("n = 4 weights need a colatitude")
        phi = np.asarray(phi, dtype=float)
        xi = np.stack(np.broadcast_arrays(np.sin(phi) * np.cos(theta),
                                          np.sin(phi) * np.sin(theta),
                                          np.cos(phi)), axis=-1)
        return np.einsum("...i,ij,...j->...", xi, M, xi)
    raise UsageError(f"unsupported weight matrix shape {M.shape}")


def build_weight(geom, grid_size):
    """Sample the angular weight of ``geom`` on a sphere grid.

    Parameters
    ----------
    geom : GapGeometry or array_like
        Either a geometry or directly the SPD matrix ``M``.
    grid_size : int or (int, int)
        ``N`` for the circle (``n = 3``), ``(n_lat, n_lon)`` or ``N`` (taken
        as ``(N, 2N)``) for the 2-sphere (``n = 4``).
    """
    if isinstance(geom, GapGeometry):
        if geom.flat:
            raise GeometryError("flat geometry has no angular weight")
        M, n = geom.hessian, geom.n
    else:
        M = np.atleast_2d(np.asarray(geom, dtype=float))
        n = M.shape[0] + 1
        check_spd(M)
    if n == 3:
        N = int(np.ravel([grid_size])[0])
        if N < 16 or N % 2:
            raise UsageError(f"circle grid size must be even and >= 16, got {N}")
        shape = (N,)
        samples = evaluate_weight(M, 2.0 * np.pi * np.arange(N) / N)
    elif n == 4:
        dims = np.ravel([grid_size]).astype(int)
        n_lat, n_lon = (dims[0], 2 * dims[0]) if dims.size == 1 else (dims[0], dims[1])
        if n_lat < 8 or n_lon < 16 or n_lat % 2 or n_lon % 4:
            raise UsageError(f"sphere grid {(n_lat, n_lon)} too small or not evenly divisible")
        shape = (int(n_lat), int(n_lon))
        phi = (np.arange(n_lat) + 0.5) * np.pi / n_lat
        theta = 2.0 * np.pi * np.arange(n_lon) / n_lon
        P, T = np.meshgrid(phi, theta, indexing="ij")
        samples = evaluate_weight(M, T, P)
    else:
        raise UsageError(f"angular weights are supported for n in {{3, 4}}, got n={n}")
    return Weight(n=n, matrix=np.array(M), shape=shape, samples=samples)
