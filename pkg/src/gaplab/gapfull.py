"""Direct solves of the insulated neck problem in flattened coordinates.

The neck ``{g(x') < x_n < eps + f(x')}`` is mapped to a box by

    eta = (x_n - g(x')) / delta(x') - 1/2,     delta = eps + f - g,

so ``eta`` runs over ``[-1/2, 1/2]``.  With ``s = grad g + (eta + 1/2) grad delta``
the Dirichlet energy becomes

    int [ delta |grad' v - (s / delta) v_eta|^2 + v_eta^2 / delta ] dx' deta,

i.e. the coefficient matrix ``b = [[delta I, -s], [-s^T, (1 + |s|^2) / delta]]``.
The discrete energy is a weighted sum of squares of difference quotients,
so the system matrix is SPD by construction, and leaving out the top and
bottom faces gives the insulating (conormal) condition for free.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import UsageError
from .geometry import GapGeometry, Weight, build_weight
from .numerics import SparseSystem, cg_solve, two_level_preconditioner
from .reduced import DiskField, DiskGrid, disk_grid


@dataclass(frozen=True)
class LateralMesh:
    """Cells of the lateral domain (an interval or a polar disk).

    Face arrays carry the two adjacent cells, the face measure, the
    distance between the cell centres, the unit normal (from ``c1`` to
    ``c2``) and the face midpoint.  Boundary faces replace ``c2`` by the
    boundary sample index.
    """

    kind: str
    centers: np.ndarray
    area: np.ndarray
    faces: dict
    bfaces: dict
    boundary_points: np.ndarray
    disk: DiskGrid = None       # the polar mesh, or the half line for intervals
    x_faces: np.ndarray = None

    @property
    def size(self):
        return self.area.size


def _line_mesh(rho, n_half, eps_min, ratio, cells_below):
    half = disk_grid(rho, 16, n_r=n_half, eps_min=eps_min, ratio=ratio,
                     cells_below=cells_below)
    return _line_from_half(half)


def _disk_mesh(grid):
    nr, nt = grid.shape
    rf, rc, dr, dt = grid.r_faces, grid.r, grid.dr, grid.dtheta
    t = grid.theta
    idx = np.arange(nr * nt).reshape(nr, nt)
    R, T = np.meshgrid(rc, t, indexing="ij")
    centers = np.stack([R * np.cos(T), R * np.sin(T)], axis=-1).reshape(-1, 2)
    area = ((rc * dr)[:, None] * dt * np.ones(nt)).ravel()

    # radial faces
    Rf, Tr = np.meshgrid(rf[1:-1], t, indexing="ij")
    nrm_r = np.stack([np.cos(Tr), np.sin(Tr)], axis=-1).reshape(-1, 2)
    pt_r = (Rf[..., None] * np.stack([np.cos(Tr), np.sin(Tr)], axis=-1)).reshape(-1, 2)
    len_r = (Rf * dt).ravel()
    dist_r = np.repeat(rc[1:] - rc[:-1], nt)
    # angular faces
    tf = t + 0.5 * dt
    Rc, Tf = np.meshgrid(rc, tf, indexing="ij")
    nrm_t = np.stack([-np.sin(Tf), np.cos(Tf)], axis=-1).reshape(-1, 2)
    pt_t = (Rc[..., None] * np.stack([np.cos(Tf), np.sin(Tf)], axis=-1)).reshape(-1, 2)
    len_t = np.repeat(dr, nt)
    dist_t = (Rc * dt).ravel()

    faces = dict(c1=np.concatenate([idx[:-1].ravel(), idx.ravel()]),
                 c2=np.concatenate([idx[1:].ravel(), np.roll(idx, -1, axis=1).ravel()]),
                 length=np.concatenate([len_r, len_t]),
                 dist=np.concatenate([dist_r, dist_t]),
                 normal=np.concatenate([nrm_r, nrm_t]),
                 point=np.concatenate([pt_r, pt_t]))
    bpts = grid.R * np.stack([np.cos(t), np.sin(t)], axis=-1)
    bfaces = dict(c=idx[-1], b=np.arange(nt), length=np.full(nt, grid.R * dt),
                  dist=np.full(nt, grid.R - rc[-1]),
                  normal=np.stack([np.cos(t), np.sin(t)], axis=-1), point=bpts)
    return LateralMesh("disk", centers, area, faces, bfaces, bpts, disk=grid)


@dataclass(frozen=True)
class MappedStrip:
    """The flattened neck: lateral mesh times ``n_z`` uniform cells in ``eta``."""

    geometry: GapGeometry
    rho: float
    mesh: LateralMesh
    n_z: int
    options: dict

    @property
    def n(self):
        return self.geometry.n

    @property
    def eta(self):
        return -0.5 + (np.arange(self.n_z) + 0.5) / self.n_z

    @property
    def shape(self):
        return (self.mesh.size, self.n_z)

    def s_vector(self, x, eta):
        """``grad g + (eta + 1/2) grad delta`` at lateral points ``x``."""
        geom = self.geometry
        x = np.asarray(x, dtype=float)
        gg = geom.lower_grad(x)
        gd = geom.separation_grad(x)
        eta = np.asarray(eta, dtype=float)
        return gg[..., None, :] + (eta[:, None] + 0.5) * gd[..., None, :]

    def b_at(self, x, eta):
        """Coefficient matrix ``b`` at one lateral point and height."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        delta = float(self.geometry.delta(x))
        s = self.s_vector(x, np.array([eta]))[0]
        d = self.n - 1
        b = np.empty((d + 1, d + 1))
        b[:d, :d] = delta * np.eye(d)
        b[:d, d] = b[d, :d] = -s
        b[d, d] = (1.0 + s @ s) / delta
        return b

    def refined(self):
        """Midpoint-inserted lateral mesh and twice the vertical cells."""
        opt = dict(self.options)
        if self.mesh.kind == "disk":
            return _strip(self.geometry, self.rho, _disk_mesh(self.mesh.disk.refined()),
                          2 * self.n_z, opt)
        mesh = _line_from_half(self.mesh.disk.refined())
        return _strip(self.geometry, self.rho, mesh, 2 * self.n_z, opt)


def _line_from_half(half):
    """Interval mesh mirrored from the radial faces of ``half`` (a DiskGrid)."""
    hf = half.r_faces
    xf = np.concatenate([-hf[::-1], hf[1:]])
    xc = 0.5 * (xf[1:] + xf[:-1])
    n = xc.size
    faces = dict(c1=np.arange(n - 1), c2=np.arange(1, n), length=np.ones(n - 1),
                 dist=np.diff(xc), normal=np.ones((n - 1, 1)), point=xf[1:-1, None])
    bfaces = dict(c=np.array([0, n - 1]), b=np.array([0, 1]), length=np.ones(2),
                  dist=np.array([xc[0] - xf[0], xf[-1] - xc[-1]]),
                  normal=np.array([[-1.0], [1.0]]), point=xf[[0, -1], None])
    return LateralMesh("line", xc[:, None], np.diff(xf), faces, bfaces,
                       xf[[0, -1], None], disk=half, x_faces=xf)


def _strip(geom, rho, mesh, n_z, options):
    return MappedStrip(geom, float(rho), mesh, int(n_z), options)


def map_strip(geom, rho=None, n_lateral=None, n_theta=64, n_z=16, ratio=1.03,
              cells_below=12, grid=None):
    """Flatten the neck of ``geom`` over ``|x'| <= rho``.

    Parameters
    ----------
    geom : GapGeometry
        ``n`` must be 2 or 3.
    rho : float, optional
        Lateral half-width, at most ``R0`` (default ``R0``).
    n_lateral : int, optional
        Radial cells (per half line when ``n = 2``); by default enough for
        ``cells_below`` cells inside ``sqrt(eps)``.
    n_theta : int
        Angles of the polar mesh (``n = 3``).
    n_z : int
        Vertical cells.
    grid : DiskGrid, optional
        Explicit polar mesh for ``n = 3``.
    """
    if geom.n not in (2, 3):
        raise UsageError(f"full gap solves support n in {{2, 3}}, got {geom.n}")
    rho = geom.R0 if rho is None else float(rho)
    if not 0 < rho <= geom.R0 * (1 + 1e-14):
        raise UsageError(f"rho must lie in (0, R0 = {geom.R0}], got {rho}")
    if n_z < 3:
        raise UsageError("need at least 3 vertical cells")
    opts = dict(ratio=ratio, cells_below=cells_below)
    if geom.n == 2:
        mesh = _line_mesh(rho, n_lateral, geom.epsilon, ratio, cells_below)
    else:
        if grid is None:
            grid = disk_grid(rho, n_theta, n_r=n_lateral, eps_min=geom.epsilon,
                             ratio=ratio, cells_below=cells_below)
        elif not np.isclose(grid.R, rho):
            raise UsageError("grid radius differs from rho")
        mesh = _disk_mesh(grid)
    return _strip(geom, rho, mesh, n_z, opts)


# --------------------------------------------------------------------------
# assembly: E(v) = sum_t w_t (B v)_t^2
# --------------------------------------------------------------------------
def _deta_stencil(n_z, d_eta):
    """Cell-centred ``d/d eta`` as three-point rows ``(index, coef)``.

    Central in the interior, second-order one-sided in the wall cells.
    Every row sums to zero, so column sums of the energy stay exact.
    """
    k = np.arange(n_z)
    idx = np.stack([k - 1, k, k + 1], axis=1)
    coef = np.tile([-0.5, 0.0, 0.5], (n_z, 1))
    idx[0], coef[0] = [0, 1, 2], [-1.5, 2.0, -0.5]
    idx[-1], coef[-1] = [n_z - 3, n_z - 2, n_z - 1], [0.5, -2.0, 1.5]
    return idx, coef / d_eta


def _energy_terms(strip):
    """Sparse ``B`` (terms x (unknowns + boundary samples)) and weights ``w``."""
    mesh = strip.mesh
    geom = strip.geometry
    nz = strip.n_z
    de = 1.0 / nz
    eta = strip.eta
    nu = mesh.size * nz
    nb = mesh.boundary_points.shape[0]
    st_idx, st_coef = _deta_stencil(nz, de)
    kk = np.arange(nz)

    rows, cols, vals, weights = [], [], [], []
    n_terms = 0

    def add_face_block(c1, c2_cols, length, dist, normal, point, halve):
        nonlocal n_terms
        nf = c1.size
        delta = geom.delta(point)
        s = strip.s_vector(point, eta)                 # (nf, nz, d)
        sn = np.einsum("fkd,fd->fk", s, normal) / delta[:, None]
        t = n_terms + np.arange(nf * nz).reshape(nf, nz)
        cu = c1[:, None] * nz + kk[None, :]
        # normal difference
        rows.extend([t.ravel(), t.ravel()])
        cols.extend([cu.ravel(), c2_cols(kk).ravel()])
        vals.extend([np.repeat(-1.0 / dist, nz), np.repeat(1.0 / dist, nz)])
        # minus (s_n / delta) times the face value of d v / d eta
        cells = [c1] if halve is None else [c1, halve]
        share = 1.0 / len(cells)
        for c in cells:
            base = c[:, None] * nz
            for m in range(3):
                rows.append(t.ravel())
                cols.append((base + st_idx[None, :, m]).ravel())
                vals.append((-sn * share * st_coef[None, :, m]).ravel())
        weights.append(np.repeat(delta * length * dist * de, nz))
        n_terms += nf * nz

    f = mesh.faces
    add_face_block(f["c1"], lambda k: f["c2"][:, None] * nz + k[None, :],
                   f["length"], f["dist"], f["normal"], f["point"], f["c2"])
    bf = mesh.bfaces
    add_face_block(bf["c"], lambda k: np.repeat(nu + bf["b"][:, None], k.size, axis=1),
                   bf["length"], bf["dist"], bf["normal"], bf["point"], None)

    # vertical differences across interior eta faces
    delta_c = geom.delta(mesh.centers)
    nc = mesh.size
    t = n_terms + np.arange(nc * (nz - 1)).reshape(nc, nz - 1)
    base = np.arange(nc)[:, None] * nz + np.arange(nz - 1)[None, :]
    rows.extend([t.ravel(), t.ravel()])
    cols.extend([base.ravel(), (base + 1).ravel()])
    vals.extend([np.full(t.size, -1.0 / de), np.full(t.size, 1.0 / de)])
    weights.append(np.repeat(mesh.area * de / delta_c, nz - 1))
    n_terms += t.size

    B = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n_terms, nu + nb))
    return B, np.concatenate(weights), nu


def _boundary_values(strip, phi):
    pts = strip.mesh.boundary_points
    if callable(phi):
        vals = np.asarray(phi(pts), dtype=float)
    else:
        vals = np.asarray(phi, dtype=float)
        if vals.ndim == 0:
            vals = np.full(pts.shape[0], float(vals))
    if vals.shape != (pts.shape[0],):
        raise UsageError(f"phi needs {pts.shape[0]} boundary samples, got {vals.shape}")
    if not np.all(np.isfinite(vals)):
        raise UsageError("phi must be finite")
    return vals


@dataclass(frozen=True)
class GapSolution:
    """Solution samples ``values[lateral cell, k]`` on the mapped strip."""

    strip: MappedStrip
    values: np.ndarray
    phi: np.ndarray
    fluxes: dict
    residual: float

    def ubar(self):
        """Vertical means (uniform in ``eta`` equals the average over ``x_n``)."""
        return self.values.mean(axis=1)

    def gradient(self):
        """Physical ``grad u`` at cell centres, shape ``(cells, n_z, n)``."""
        strip = self.strip
        mesh = strip.mesh
        nz = strip.n_z
        v = self.values
        d_eta = np.gradient(v, strip.eta, axis=1, edge_order=2)
        x = mesh.centers
        delta = strip.geometry.delta(x)[:, None]
        s = strip.s_vector(x, strip.eta)
        if mesh.kind == "line":
            lat = np.gradient(v, x[:, 0], axis=0, edge_order=2)[..., None]
        else:
            g = mesh.disk
            w = v.reshape(g.n_r, g.n_theta, nz)
            vr = np.gradient(w, g.r, axis=0, edge_order=2)
            vt = (np.roll(w, -1, axis=1) - np.roll(w, 1, axis=1)) / (2 * g.dtheta)
            vt = vt / g.r[:, None, None]
            th = g.theta[None, :, None]
            gx = vr * np.cos(th) - vt * np.sin(th)
            gy = vr * np.sin(th) + vt * np.cos(th)
            lat = np.stack([gx, gy], axis=-1).reshape(-1, nz, 2)
        lat = lat - s * (d_eta / delta)[..., None]
        return np.concatenate([lat, (d_eta / delta)[..., None]], axis=-1)

    def max_gradient(self, skip_outer=2):
        """Largest ``|grad u|`` and its location ``(x', eta)``.

        The ``skip_outer`` outermost lateral cells (rings for the disk, both
        ends for the line) are excluded.
        """
        gn = np.linalg.norm(self.gradient(), axis=-1)
        mesh = self.strip.mesh
        keep = np.ones(mesh.size, dtype=bool)
        if skip_outer:
            if mesh.kind == "line":
                keep[:skip_outer] = keep[-skip_outer:] = False
            else:
                g = mesh.disk
                k2 = keep.reshape(g.n_r, g.n_theta)
                k2[-skip_outer:] = False
        sub = np.where(keep[:, None], gn, -np.inf)
        c, k = np.unravel_index(np.argmax(sub), sub.shape)
        return float(gn[c, k]), (tuple(float(t) for t in mesh.centers[c]),
                                 float(self.strip.eta[k]))

    def to_rows(self):
        mesh = self.strip.mesh
        eta = self.strip.eta
        nz = eta.size
        if mesh.kind == "line":
            x = np.repeat(mesh.centers[:, 0], nz)
            return np.column_stack([x, np.tile(eta, mesh.size), self.values.ravel()])
        g = mesh.disk
        r = np.repeat(np.repeat(g.r, g.n_theta), nz)
        t = np.repeat(np.tile(g.theta, g.n_r), nz)
        return np.column_stack([r, t, np.tile(eta, mesh.size), self.values.ravel()])


def solve_gap(strip, phi=None, tol=1e-12, maxiter=None):
    """Solve the insulated neck problem with lateral Dirichlet data ``phi``.

    ``phi`` is a callable of the wall points ``(m, n-1)``, an array of wall
    samples, or a constant; it defaults to ``x_1``.  The linear system is
    solved by CG with a column block-Jacobi plus coarse-column
    preconditioner.

    Returns
    -------
    GapSolution
        ``fluxes`` holds the inward flux through each wall sample and the
        totals; top and bottom fluxes are zero by construction.
    """
    if phi is None:
        phi = lambda x: x[:, 0]  # noqa: E731
    vals = _boundary_values(strip, phi)
    B, w, nu = _energy_terms(strip)
    Bi = B[:, :nu]
    Bb = B[:, nu:]
    WB = sp.diags(w) @ Bi
    K = SparseSystem.assemble(Bi.T @ WB)
    rhs = -(WB.T @ (Bb @ vals))
    labels = np.repeat(np.arange(strip.mesh.size), strip.n_z)
    x = cg_solve(K, rhs, tol=tol, maxiter=maxiter,
                 preconditioner=two_level_preconditioner(K, labels))
    bn = np.linalg.norm(rhs)
    res = float(np.linalg.norm(rhs - K.matrix @ x) / bn) if bn else 0.0

    per_term = w * (Bi @ x + Bb @ vals)
    inflow = np.asarray(Bb.T @ per_term)
    fin = float(inflow[inflow > 0].sum())
    fout = float(-inflow[inflow < 0].sum())
    fluxes = {"wall": inflow, "in": fin, "out": fout, "net": float(inflow.sum()),
              "top": 0.0, "bottom": 0.0}
    return GapSolution(strip, x.reshape(strip.shape), vals, fluxes, res)


@dataclass(frozen=True)
class LineProfile:
    x: np.ndarray
    values: np.ndarray


def average_vertical(sol):
    """``u_bar``: a :class:`DiskField` for ``n = 3`` or a :class:`LineProfile` for ``n = 2``."""
    mesh = sol.strip.mesh
    ub = sol.ubar()
    if mesh.kind == "line":
        return LineProfile(mesh.centers[:, 0].copy(), ub)
    g = mesh.disk
    geom = sol.strip.geometry
    if geom.flat:
        weight = Weight(3, np.zeros((2, 2)), (g.n_theta,), np.ones(g.n_theta))
    else:
        weight = build_weight(geom.hessian, g.n_theta)
    return DiskField(g, ub.reshape(g.shape), geom.epsilon, weight, sol.phi)


def averaged_fluxes(sol):
    """Cell-centre ``F~`` by the midpoint rule in ``eta``.

    ``F~ = int ((eta - 1/2) grad g - (eta + 1/2) grad f) d_eta v  d eta``.
    """
    strip = sol.strip
    geom = strip.geometry
    x = strip.mesh.centers
    eta = strip.eta
    d_eta = np.gradient(sol.values, eta, axis=1, edge_order=2)
    gg = geom.lower_grad(x)
    gf = geom.upper_grad(x)
    kern = (eta[None, :, None] - 0.5) * gg[:, None, :] - (eta[None, :, None] + 0.5) * gf[:, None, :]
    return np.mean(kern * d_eta[..., None], axis=1)


def averaged_residual(sol, r_range=None):
    """Residual of ``div(delta grad u_bar) + div F~ = 0`` per unit area.

    Cell-centre ``delta``, ``u_bar`` and ``F~`` are combined into face
    fluxes by plain averaging, an independent second-order discretization
    of the averaged equation.  Returns the max residual over cells whose
    ``|x'|`` lies in ``r_range`` (default: the whole interior away from
    the two outermost cells).
    """
    strip = sol.strip
    mesh = strip.mesh
    geom = strip.geometry
    ub = sol.ubar()
    Ft = averaged_fluxes(sol)
    dc = geom.delta(mesh.centers)
    f = mesh.faces
    c1, c2 = f["c1"], f["c2"]
    flux = (0.5 * (dc[c1] + dc[c2]) * (ub[c2] - ub[c1]) / f["dist"]
            + np.einsum("fd,fd->f", 0.5 * (Ft[c1] + Ft[c2]), f["normal"])) * f["length"]
    div = np.bincount(c1, flux, mesh.size) - np.bincount(c2, flux, mesh.size)
    res = np.abs(div) / mesh.area
    rad = np.linalg.norm(mesh.centers, axis=1)
    keep = np.ones(mesh.size, dtype=bool)
    bc = mesh.bfaces["c"]
    keep[bc] = False
    if mesh.kind == "disk":
        g = mesh.disk
        keep.reshape(g.shape)[-2:] = False
    else:
        keep[[1, -2]] = False
    if r_range is not None:
        keep &= (rad >= r_range[0]) & (rad <= r_range[1])
    return float(res[keep].max())
