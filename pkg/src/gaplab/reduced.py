"""Finite-volume solver for ``div((eps + a(xi) |x|^2) grad v) = div F + G`` on a disk.

The disk ``B_R`` of the plane is cut into polar cells.  Radii are cell
centred (no unknown sits at the origin, whose face has zero length) and
geometrically stretched so that the inner scale ``sqrt(eps)`` is resolved.
The assembled operator is a sum of face fluxes, hence symmetric, and it is
linear in the coefficient: ``K_eps = K_0 + eps K_lap``.

At ``eps = 0`` the discrete operator separates exactly on the angular
eigenbasis of :mod:`gaplab.spectral` built on the same angle grid.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InapplicableError, UsageError
from .exponents import alpha_of
from .geometry import Weight, build_weight
from .numerics import SparseSystem, cg_solve
from .spectral import solve_spectrum, weighted_inner


# --------------------------------------------------------------------------
# grid
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class DiskGrid:
    """Polar cells ``[r_f[i], r_f[i+1]] x [theta_j -/+ dtheta/2]``."""

    R: float
    r_faces: np.ndarray
    n_theta: int
    ratio: float = 1.0

    def __post_init__(self):
        rf = np.asarray(self.r_faces, dtype=float)
        if rf[0] != 0.0 or np.any(np.diff(rf) <= 0):
            raise UsageError("radial faces must start at 0 and increase")
        if not np.isclose(rf[-1], self.R, rtol=1e-13, atol=0):
            raise UsageError("last radial face must equal R")
        if self.n_theta < 16 or self.n_theta % 2:
            raise UsageError("n_theta must be even and >= 16")
        rf[-1] = self.R
        object.__setattr__(self, "r_faces", rf)

    @property
    def n_r(self):
        return self.r_faces.size - 1

    @property
    def shape(self):
        return (self.n_r, self.n_theta)

    @property
    def r(self):
        return 0.5 * (self.r_faces[1:] + self.r_faces[:-1])

    @property
    def dr(self):
        return np.diff(self.r_faces)

    @property
    def dtheta(self):
        return 2.0 * np.pi / self.n_theta

    @property
    def theta(self):
        return self.dtheta * np.arange(self.n_theta)

    def cells_below(self, rho):
        return int(np.count_nonzero(self.r_faces[1:] <= rho))

    def xy(self):
        r, t = np.meshgrid(self.r, self.theta, indexing="ij")
        return r * np.cos(t), r * np.sin(t)

    def refined(self):
        """Split every radial cell in two and double the angles.

        A geometric grid ``r_k + c = c q^k`` is split at the geometric
        midpoints of ``r + c``, giving the geometric grid with ratio
        ``sqrt(q)``; the grid stays smooth, so second-order behaviour
        carries over to refinement studies.
        """
        rf = self.r_faces
        if self.ratio == 1.0:
            mid = 0.5 * (rf[1:] + rf[:-1])
        else:
            c = rf[1] / (self.ratio - 1.0)
            mid = np.sqrt((rf[1:] + c) * (rf[:-1] + c)) - c
        new = np.empty(2 * rf.size - 1)
        new[0::2] = rf
        new[1::2] = mid
        return DiskGrid(self.R, new, 2 * self.n_theta, float(np.sqrt(self.ratio)))


def disk_grid(R=1.0, n_theta=128, n_r=None, eps_min=1e-4, ratio=1.03, cells_below=12):
    """Geometric radial grid with ``cells_below`` cells inside ``sqrt(eps_min)``.

    Faces are ``R (q^k - 1) / (q^N - 1)``.  When ``n_r`` is omitted the
    smallest ``N`` giving the requested inner resolution is used.
    ``ratio = 1`` gives uniform cells.
    """
    if not R > 0:
        raise UsageError("R must be positive")
    if ratio < 1:
        raise UsageError("ratio must be >= 1")
    if n_r is None:
        if ratio == 1.0:
            raise UsageError("uniform grids need an explicit n_r")
        rho = np.sqrt(eps_min)
        if rho >= R:
            n_r = 4 * cells_below
        else:
            need = (ratio ** cells_below - 1.0) * R / rho
            n_r = max(int(np.ceil(np.log1p(need) / np.log(ratio))), cells_below + 8)
    n_r = int(n_r)
    if n_r < 4:
        raise UsageError("need at least 4 radial cells")
    k = np.arange(n_r + 1)
    if ratio == 1.0:
        rf = R * k / n_r
    else:
        rf = R * np.expm1(k * np.log(ratio)) / np.expm1(n_r * np.log(ratio))
    return DiskGrid(R, rf, int(n_theta), float(ratio))


def _as_grid(grid, R, weight, eps):
    if isinstance(grid, DiskGrid):
        return grid
    n_theta = weight.shape[0]
    if grid is None:
        return disk_grid(R, n_theta, eps_min=max(eps, 1e-5) if eps > 0 else 1e-4)
    n_r, n_theta = (int(g) for g in grid)
    return disk_grid(R, n_theta, n_r=n_r)


def _weight_on(grid, weight):
    if weight.n != 3:
        raise UsageError("the reduced solver handles the planar disk (n = 3) only")
    if weight.shape[0] == grid.n_theta:
        return weight
    return build_weight(weight.matrix, grid.n_theta)


# --------------------------------------------------------------------------
# fields
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class DiskField:
    """Cell values of a solution on a :class:`DiskGrid`.

    ``boundary`` holds the Dirichlet samples at ``r = R``.
    """

    grid: DiskGrid
    values: np.ndarray
    epsilon: float
    weight: Weight
    boundary: np.ndarray = None
    residual: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise UsageError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise UsageError("field has non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def center_value(self):
        """``v(0)`` as the ``a``-weighted mean over the innermost ring."""
        a = self.weight.samples
        return float(np.sum(a * self.values[0]) / np.sum(a))

    def ring_mean(self, i):
        a = self.weight.samples
        return float(np.sum(a * self.values[i]) / np.sum(a))

    def gradient(self):
        """``(d_r v, r^{-1} d_theta v)`` at cell centres."""
        g = self.grid
        vr = np.gradient(self.values, g.r, axis=0, edge_order=2)
        vt = (np.roll(self.values, -1, axis=1) - np.roll(self.values, 1, axis=1))
        vt = vt / (2.0 * g.dtheta) / g.r[:, None]
        return vr, vt

    def grad_norm(self):
        vr, vt = self.gradient()
        return np.hypot(vr, vt)

    def max_gradient(self, skip_outer=2, r_range=None):
        """Largest ``|grad v|`` and its ``(r, theta)``.

        The ``skip_outer`` outermost rings are left out; ``r_range`` limits
        the search to an annulus.
        """
        gn = self.grad_norm()
        g = self.grid
        mask = np.ones(g.n_r, dtype=bool)
        if skip_outer:
            mask[-skip_outer:] = False
        if r_range is not None:
            mask &= (g.r >= r_range[0]) & (g.r <= r_range[1])
        if not mask.any():
            raise UsageError("no rings left for the gradient search")
        sub = np.where(mask[:, None], gn, -np.inf)
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        return float(gn[i, j]), (float(g.r[i]), float(g.theta[j]))

    def to_rows(self):
        r, t = np.meshgrid(self.grid.r, self.grid.theta, indexing="ij")
        return np.column_stack([r.ravel(), t.ravel(), self.values.ravel()])


@dataclass(frozen=True)
class Forcing:
    """Right-hand side ``div F + G`` sampled at cell centres.

    ``F`` has shape ``(2,) + grid.shape`` with Cartesian components; ``G``
    has ``grid.shape``.  Either may be ``None`` for zero.
    """

    F: np.ndarray = None
    G: np.ndarray = None

    def __post_init__(self):
        for name in ("F", "G"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                if not np.all(np.isfinite(arr)):
                    raise UsageError(f"forcing {name} is not finite")
                object.__setattr__(self, name, arr)

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def from_functions(cls, grid, F=None, G=None):
        """Sample callables ``F(x, y) -> (Fx, Fy)`` and ``G(x, y)``."""
        x, y = grid.xy()
        Fs = None if F is None else np.stack([np.broadcast_to(c, x.shape) for c in F(x, y)])
        Gs = None if G is None else np.broadcast_to(G(x, y), x.shape).astype(float)
        return cls(Fs, Gs)

    @property
    def is_zero(self):
        return ((self.F is None or not np.any(self.F))
                and (self.G is None or not np.any(self.G)))

    def check(self, grid):
        if self.F is not None and self.F.shape != (2,) + grid.shape:
            raise UsageError(f"F must have shape {(2,) + grid.shape}")
        if self.G is not None and self.G.shape != grid.shape:
            raise UsageError(f"G must have shape {grid.shape}")

    def __add__(self, other):
        def add(a, b):
            if a is None:
                return b
            return a if b is None else a + b
        return Forcing(add(self.F, other.F), add(self.G, other.G))


@dataclass(frozen=True)
class RadialProfile:
    rho: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if rho.shape != v.shape or rho.ndim != 1:
            raise UsageError("rho and values must be 1-D of equal length")
        if np.any(rho <= 0) or np.any(np.diff(rho) <= 0):
            raise UsageError("rho must be positive and strictly increasing")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "values", v)

    def at(self, rho):
        """Interpolate linearly in ``log rho``."""
        return float(np.interp(np.log(rho), np.log(self.rho), self.values))


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------
@dataclass(frozen=True)
class _Operator:
    """``-div(A grad .)`` split as ``K_0 + eps K_lap`` plus boundary couplings."""

    K0: sp.csr_matrix
    Klap: sp.csr_matrix
    cb0: np.ndarray
    cblap: np.ndarray
    area: np.ndarray

    def matrix(self, eps):
        return self.K0 + eps * self.Klap if eps else self.K0

    def boundary(self, eps):
        return self.cb0 + eps * self.cblap


def _assemble(grid, weight):
    nr, nt = grid.shape
    rf, rc, dr, dt = grid.r_faces, grid.r, grid.dr, grid.dtheta
    idx = np.arange(nr * nt).reshape(nr, nt)
    a_c = weight.samples
    a_f = weight.evaluate(grid.theta + 0.5 * dt)

    rows, cols, v0, vl = [], [], [], []

    # radial faces between ring k-1 and k
    dist = rc[1:] - rc[:-1]
    fk = rf[1:-1]
    c0 = (a_c[None, :] * (fk ** 3 * dt / dist)[:, None]).ravel()
    cl = np.repeat(fk * dt / dist, nt)
    rows.append(idx[:-1].ravel())
    cols.append(idx[1:].ravel())
    v0.append(c0)
    vl.append(cl)

    # angular faces between theta_j and theta_{j+1}
    c0 = (a_f[None, :] * (rc * dr / dt)[:, None]).ravel()
    cl = np.repeat(dr / (rc * dt), nt)
    rows.append(idx.ravel())
    cols.append(np.roll(idx, -1, axis=1).ravel())
    v0.append(c0)
    vl.append(cl)

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    n = nr * nt

    def laplacian_like(c):
        off = sp.coo_matrix((-c, (rows, cols)), shape=(n, n))
        deg = np.bincount(rows, c, n) + np.bincount(cols, c, n)
        return off, deg

    off0, deg0 = laplacian_like(np.concatenate(v0))
    offl, degl = laplacian_like(np.concatenate(vl))

    # Dirichlet face at r = R, distance from the last centre
    R = grid.R
    hb = R - rc[-1]
    cb0 = a_c * R ** 3 * dt / hb
    cbl = np.full(nt, R * dt / hb)
    deg0[idx[-1]] += cb0
    degl[idx[-1]] += cbl

    K0 = (off0 + off0.T + sp.diags(deg0)).tocsr()
    Kl = (offl + offl.T + sp.diags(degl)).tocsr()
    area = (rc * dr)[:, None] * dt * np.ones((1, nt))
    return _Operator(K0, Kl, cb0, cbl, area)


def _divergence(grid, F):
    """Cell integrals of ``div F`` from face-interpolated normal components."""
    Fx, Fy = F
    t = grid.theta
    dt = grid.dtheta
    rf, rc, dr = grid.r_faces, grid.r, grid.dr
    Fr = Fx * np.cos(t) + Fy * np.sin(t)

    # radial faces; zero length at the origin, linear extrapolation at R
    Fr_f = np.zeros((grid.n_r + 1, grid.n_theta))
    Fr_f[1:-1] = 0.5 * (Fr[1:] + Fr[:-1])
    slope = (Fr[-1] - Fr[-2]) / (rc[-1] - rc[-2])
    Fr_f[-1] = Fr[-1] + slope * (grid.R - rc[-1])
    flux_r = Fr_f * (rf * dt)[:, None]

    tf = t + 0.5 * dt
    Fx_f = 0.5 * (Fx + np.roll(Fx, -1, axis=1))
    Fy_f = 0.5 * (Fy + np.roll(Fy, -1, axis=1))
    Ft_f = -Fx_f * np.sin(tf) + Fy_f * np.cos(tf)
    flux_t = Ft_f * dr[:, None]

    return (flux_r[1:] - flux_r[:-1]) + (flux_t - np.roll(flux_t, 1, axis=1))


def _boundary_samples(boundary, grid):
    if boundary is None:
        return np.zeros(grid.n_theta)
    b = np.asarray(boundary, dtype=float)
    if b.ndim == 0:
        return np.full(grid.n_theta, float(b))
    if b.shape != (grid.n_theta,):
        raise UsageError(f"boundary needs {grid.n_theta} samples, got {b.shape}")
    return b


def _lu_preconditioner(matrix):
    lu = spla.splu(matrix.tocsc(), permc_spec="COLAMD")
    return lu.solve


def apply_operator(field_values, grid, weight, eps, boundary=None):
    """Discrete ``div((eps + a r^2) grad v)`` per unit area at cell centres."""
    op = _assemble(grid, weight)
    v = np.asarray(field_values, dtype=float).ravel()
    g = _boundary_samples(boundary, grid)
    flux = -(op.matrix(eps) @ v)
    flux[-grid.n_theta:] += op.boundary(eps) * g
    return flux.reshape(grid.shape) / op.area


def solve_reduced(weight, eps, R=1.0, boundary=None, forcing=None, grid=None,
                  tol=1e-10):
    """Solve ``div((eps + a |x|^2) grad v) = div F + G`` in ``B_R``, ``v = boundary`` on ``dB_R``.

    Parameters
    ----------
    weight : Weight
        Angular weight (``n = 3``); resampled if its grid differs from the
        disk's angle grid.
    eps : float
        ``eps >= 0``.  ``eps = 0`` gives the degenerate operator and only
        accepts homogeneous forcing.
    R : float
    boundary : float or ndarray, optional
        Dirichlet samples at ``theta_j``.
    forcing : Forcing, optional
    grid : DiskGrid or (n_r, n_theta), optional
    tol : float
        Relative residual for CG.

    Returns
    -------
    DiskField
    """
    if not eps >= 0:
        raise UsageError(f"eps must be non-negative, got {eps}")
    forcing = forcing or Forcing()
    if eps == 0 and not forcing.is_zero:
        raise UsageError("eps = 0 only supports homogeneous forcing")
    grid = _as_grid(grid, R, weight, eps)
    R = grid.R
    weight = _weight_on(grid, weight)
    forcing.check(grid)
    g = _boundary_samples(boundary, grid)

    op = _assemble(grid, weight)
    A = SparseSystem(op.matrix(eps))
    rhs = np.zeros(grid.shape)
    if forcing.G is not None:
        rhs -= forcing.G * op.area
    if forcing.F is not None:
        rhs -= _divergence(grid, forcing.F)
    rhs = rhs.ravel()
    rhs[-grid.n_theta:] += op.boundary(eps) * g

    # exact sparse factorization as preconditioner; CG certifies the residual
    x = cg_solve(A, rhs, tol=tol, preconditioner=_lu_preconditioner(A.matrix))
    bn = np.linalg.norm(rhs)
    res = float(np.linalg.norm(rhs - A.matrix @ x) / bn) if bn else 0.0
    return DiskField(grid, x.reshape(grid.shape), float(eps), weight, g, res)


# --------------------------------------------------------------------------
# post-processing
# --------------------------------------------------------------------------
def project_mode(field, Y):
    """Ring-wise ``a``-weighted projection of ``v - v(0)`` on the mode ``Y``."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape != (field.grid.n_theta,):
        raise UsageError(f"mode has {Y.shape} samples, grid has {field.grid.n_theta} angles")
    c = field.center_value
    w = field.weight
    vals = np.array([weighted_inner(field.values[i] - c, Y, w) for i in range(field.grid.n_r)])
    return RadialProfile(field.grid.r, vals)


def _ring_norms(field):
    c = field.center_value
    w = field.weight
    q = w.quadrature() * w.samples
    d = field.values - c
    return np.sqrt(np.sum(q[None, :] * d * d, axis=1))


def mode_norm(field, rho):
    """``omega(rho)``: ``a``-weighted RMS of ``v - v(0)`` on the ring nearest ``rho``."""
    if not 0 < rho <= field.grid.R:
        raise UsageError(f"rho must lie in (0, {field.grid.R}], got {rho}")
    i = int(np.argmin(np.abs(np.log(field.grid.r / rho))))
    return float(_ring_norms(field)[i])


def omega_profile(field):
    return RadialProfile(field.grid.r, _ring_norms(field))


def weighted_norm(F, grid, weight, eps, sigma, s, R=None):
    """``sup |F| / (|x|^sigma (eps + a |x|^2)^(1-s))`` over cells with ``|x| <= R``.

    ``F`` is a :class:`Forcing` (its vector part is used, or ``G`` when
    there is none) or a scalar array on the grid.
    """
    weight = _weight_on(grid, weight)
    if isinstance(F, Forcing):
        if F.F is not None:
            mag = np.hypot(F.F[0], F.F[1])
        elif F.G is not None:
            mag = np.abs(F.G)
        else:
            return 0.0
    else:
        mag = np.abs(np.asarray(F, dtype=float))
    if mag.shape != grid.shape:
        raise UsageError("field does not match the grid")
    r = grid.r[:, None]
    scale = r ** sigma * (eps + weight.samples[None, :] * r * r) ** (1.0 - s)
    mask = np.broadcast_to(r <= (grid.R if R is None else R), mag.shape)
    return float(np.max(np.where(mask, mag / scale, 0.0)))


def lambda1_alpha(weight, n_theta=None):
    """``alpha(lambda_1)`` of a circle weight (extrapolated spectrum)."""
    basis = solve_spectrum(weight if n_theta is None else build_weight(weight.matrix, n_theta))
    return alpha_of(basis.lambda1, 3), basis


@dataclass(frozen=True)
class BarrierReport:
    alpha: float
    alpha_tilde: float
    min_ratio: float
    constant: float
    threshold: float
    precondition: float
    passed: bool

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def barrier_check(weight, eps, alpha_tilde, grid=None, R=1.0, alpha=None,
                  threshold_fraction=0.9):
    """Check that ``psi = -(eps + a |x|^2)^((alpha - alpha_tilde)/2)`` is a barrier.

    The discrete operator is applied to the sampled ``psi`` (with the exact
    boundary values) and ``L psi / w^beta`` is minimized over all rings but
    the outermost.  The continuum lower bound is
    ``constant = tr(M) (alpha_tilde - alpha) / 2`` whenever
    ``(alpha_tilde - alpha) |M x|^2 / w <= tr(M) / 2`` on the disk; the check
    passes if the discrete minimum is at least ``threshold_fraction`` times
    that constant.

    Raises
    ------
    InapplicableError
        When the smallness condition on ``alpha_tilde`` fails on the grid.
    """
    if not eps > 0:
        raise UsageError("barrier check needs eps > 0")
    if alpha is None:
        alpha, _ = lambda1_alpha(weight)
    if not alpha <= alpha_tilde < 1:
        raise UsageError(f"alpha_tilde must lie in [{alpha:.6f}, 1)")
    grid = _as_grid(grid, R, weight, eps)
    weight = _weight_on(grid, weight)
    M = weight.matrix
    d = alpha_tilde - alpha
    beta = -0.5 * d
    tr = float(np.trace(M))

    x, y = grid.xy()
    w = eps + weight.samples[None, :] * grid.r[:, None] ** 2
    Mx = M[0, 0] * x + M[0, 1] * y
    My = M[1, 0] * x + M[1, 1] * y
    cond = d * (Mx ** 2 + My ** 2) / w
    tb = grid.theta
    xb, yb = grid.R * np.cos(tb), grid.R * np.sin(tb)
    wb = eps + weight.samples * grid.R ** 2
    cond_b = d * ((M[0, 0] * xb + M[0, 1] * yb) ** 2 + (M[1, 0] * xb + M[1, 1] * yb) ** 2) / wb
    worst = float(max(cond.max(), cond_b.max()))
    if worst > 0.5 * tr * (1 + 1e-12):
        raise InapplicableError(
            f"alpha_tilde too large: condition reaches {worst:.4f} > tr(M)/2 = {0.5 * tr:.4f}")

    psi = -(w ** beta)
    psi_b = -(wb ** beta)
    Lpsi = apply_operator(psi, grid, weight, eps, psi_b)
    ratio = Lpsi[:-1] / w[:-1] ** beta
    min_ratio = float(ratio.min())
    constant = float(0.5 * tr * d)
    threshold = float(threshold_fraction * constant)
    return BarrierReport(alpha=float(alpha), alpha_tilde=float(alpha_tilde),
                         min_ratio=min_ratio, constant=constant, threshold=threshold,
                         precondition=worst, passed=bool(d > 0 and min_ratio >= threshold))


@dataclass(frozen=True)
class Decomposition:
    """``v_bar = v1 + ... + v5`` with per-part sup norms."""

    v_bar: DiskField
    parts: list
    sup_norms: dict
    sum_error: float
    scales: dict = field(default_factory=dict)

    def report(self):
        return {"sup_norms": dict(self.sup_norms), "sum_error": self.sum_error,
                "scales": dict(self.scales)}


def decompose_five(weight, eps, R=1.0, boundary=None, F1=None, F2=None, G=None,
                   grid=None, tol=1e-10, alpha=None):
    """Split the forced solution into five pieces.

    ``v1``: the ``eps = 0`` problem with the boundary data;
    ``v2``: ``L_eps v2 = -eps Lap_h v1`` with zero data;
    ``v3``, ``v4``, ``v5``: the responses to ``G``, ``div F1``, ``div F2``.
    Because ``L_eps = L_0 + eps Lap_h`` holds exactly for the discrete
    operators, the five parts add up to ``v_bar`` to solver tolerance.

    ``F1``, ``F2`` are Cartesian sample arrays of shape ``(2,) + grid.shape``;
    ``G`` has ``grid.shape``.
    """
    if not eps > 0:
        raise UsageError("decomposition needs eps > 0")
    grid = _as_grid(grid, R, weight, eps)
    weight = _weight_on(grid, weight)
    g = _boundary_samples(boundary, grid)

    def solve(bnd, forcing):
        return solve_reduced(weight, eps, boundary=bnd, forcing=forcing, grid=grid, tol=tol)

    total = Forcing(None, G) + Forcing(F1, None) + Forcing(F2, None)
    v_bar = solve(g, total)
    v1 = solve_reduced(weight, 0.0, boundary=g, grid=grid, tol=tol)

    op = _assemble(grid, weight)
    lap_flux = -(op.Klap @ v1.values.ravel())
    lap_flux[-grid.n_theta:] += op.cblap * g
    lap_v1 = lap_flux.reshape(grid.shape) / op.area

    v2 = solve(None, Forcing(None, -eps * lap_v1))
    v3 = solve(None, Forcing(None, G))
    v4 = solve(None, Forcing(F1, None))
    v5 = solve(None, Forcing(F2, None))
    parts = [v1, v2, v3, v4, v5]
    summed = sum(p.values for p in parts)
    scale = max(np.max(np.abs(v_bar.values)), 1e-300)
    err = float(np.max(np.abs(summed - v_bar.values)) / scale)
    sups = {f"v{k + 1}": float(np.max(np.abs(p.values))) for k, p in enumerate(parts)}

    scales = {}
    if alpha is None and G is not None:
        alpha, _ = lambda1_alpha(weight)
    if G is not None:
        scales["G_norm_times_R_alpha"] = weighted_norm(
            np.asarray(G), grid, weight, eps, alpha, 1.0) * grid.R ** alpha
    if F1 is not None:
        scales["F1_over_eps_norm_times_R2"] = weighted_norm(
            Forcing(np.asarray(F1) / eps), grid, weight, eps, 1.0, 1.0) * grid.R ** 2
    return Decomposition(v_bar=v_bar, parts=parts, sup_norms=sups, sum_error=err,
                         scales=scales)
