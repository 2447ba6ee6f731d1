import numpy as np
import pytest

from gaplab.errors import UsageError
from gaplab.gapfull import (LineProfile, average_vertical, averaged_residual, map_strip,
                            solve_gap)
from gaplab.geometry import GapGeometry
from gaplab.reduced import DiskField


@pytest.fixture(scope="module")
def line_sol():
    geom = GapGeometry(2, 1e-2, [[1.0]])
    return solve_gap(map_strip(geom, n_z=8))


def test_flat_b_closed_form():
    eps = 0.05
    for n in (2, 3):
        strip = map_strip(GapGeometry.flat_gap(n, eps), n_theta=16, n_z=4)
        x = np.full(n - 1, 0.3)
        b = strip.b_at(x, 0.1)
        expect = np.diag([eps] * (n - 1) + [1.0 / eps])
        np.testing.assert_allclose(b, expect, rtol=1e-14, atol=0)


def test_b_spd_and_parity_n2():
    strip = map_strip(GapGeometry(2, 1e-2, [[1.0]]), n_z=4)
    for x in (0.1, 0.4, 0.9):
        for eta in (-0.4, 0.0, 0.3):
            b = strip.b_at([x], eta)
            bm = strip.b_at([-x], eta)
            assert np.all(np.linalg.eigvalsh(b) > 0)
            assert np.isfinite(np.linalg.cond(b))
            assert bm[0, 1] == pytest.approx(-b[0, 1], abs=1e-15)
            assert bm[0, 0] == b[0, 0] and bm[1, 1] == pytest.approx(b[1, 1], rel=1e-15)


def test_b_rotation_symmetry_n3():
    strip = map_strip(GapGeometry(3, 1e-2, np.eye(2)), n_theta=16, n_z=4)
    x = np.array([0.3, 0.2])
    phi = 0.7
    Q = np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])
    R3 = np.eye(3)
    R3[:2, :2] = Q
    for eta in (-0.3, 0.2):
        np.testing.assert_allclose(strip.b_at(Q @ x, eta), R3 @ strip.b_at(x, eta) @ R3.T,
                                   atol=1e-10)


def test_map_strip_errors():
    geom = GapGeometry(2, 1e-2, [[1.0]], R0=0.5)
    with pytest.raises(UsageError):
        map_strip(geom, rho=0.8)
    with pytest.raises(UsageError):
        map_strip(geom, n_z=2)
    with pytest.raises(UsageError):
        map_strip(GapGeometry(4, 1e-2, np.eye(3)))


@pytest.mark.parametrize("n", [2, 3])
def test_constant_data(n):
    geom = GapGeometry(n, 1e-2, np.eye(n - 1))
    sol = solve_gap(map_strip(geom, n_theta=16, n_z=4), phi=1.7)
    np.testing.assert_allclose(sol.values, 1.7, rtol=1e-10)


def test_flat_gap_linear_solution():
    strip = map_strip(GapGeometry.flat_gap(2, 0.1), n_z=4)
    sol = solve_gap(strip)
    x1 = strip.mesh.centers[:, 0]
    np.testing.assert_allclose(sol.values, np.repeat(x1[:, None], 4, axis=1), atol=1e-9)
    ub = average_vertical(sol)
    np.testing.assert_allclose(ub.values, x1, atol=1e-9)
    g = sol.gradient()
    np.testing.assert_allclose(g[..., 0], 1.0, atol=1e-7)
    np.testing.assert_allclose(g[..., -1], 0.0, atol=1e-7)


def test_flat_gap_polar_converges_to_linear():
    # two-point polar fluxes are not exact for x_1; the error is O(dtheta^2)
    errs = []
    for nt in (16, 32, 64):
        strip = map_strip(GapGeometry.flat_gap(3, 0.1), n_theta=nt, n_z=4, n_lateral=24)
        sol = solve_gap(strip)
        errs.append(np.max(np.abs(sol.values - strip.mesh.centers[:, :1])))
        assert np.ptp(sol.values, axis=1).max() < 1e-9
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_average_of_fiber_constant(line_sol):
    u = line_sol.values
    fake = type(line_sol)(line_sol.strip, np.repeat(u[:, :1], u.shape[1], axis=1),
                          line_sol.phi, line_sol.fluxes, 0.0)
    np.testing.assert_allclose(average_vertical(fake).values, u[:, 0])
    assert isinstance(average_vertical(line_sol), LineProfile)


def test_conservation_and_insulation(line_sol):
    fl = line_sol.fluxes
    assert abs(fl["net"]) <= 1e-10 * fl["in"]
    assert fl["top"] == 0.0 and fl["bottom"] == 0.0


def test_maximum_principle_and_oddness(line_sol):
    phi = line_sol.phi
    assert line_sol.values.min() >= phi.min() - 1e-12
    assert line_sol.values.max() <= phi.max() + 1e-12
    # symmetric walls, odd data: u(-x, eta) = -u(x, eta)
    np.testing.assert_allclose(line_sol.values[::-1], -line_sol.values, atol=1e-10)


def test_oddness_n3():
    geom = GapGeometry(3, 1e-2, np.diag([1.0, 4.0]))
    strip = map_strip(geom, n_theta=16, n_z=4)
    sol = solve_gap(strip, phi=lambda x: x[:, 1])
    g = strip.mesh.disk
    v = sol.values.reshape(g.n_r, g.n_theta, -1)
    perm = (-np.arange(g.n_theta)) % g.n_theta
    np.testing.assert_allclose(v[:, perm], -v, atol=1e-10)


def test_averaged_residual_second_order():
    geom = GapGeometry(2, 1e-2, [[1.0]])
    strip = map_strip(geom, n_z=8)
    r1 = averaged_residual(solve_gap(strip))
    r2 = averaged_residual(solve_gap(strip.refined()))
    assert 2.5 <= r1 / r2 <= 6


def test_n3_average_is_disk_field():
    geom = GapGeometry(3, 1e-2, np.eye(2))
    sol = solve_gap(map_strip(geom, n_theta=16, n_z=4))
    assert isinstance(average_vertical(sol), DiskField)


def test_phi_shape_error():
    strip = map_strip(GapGeometry(2, 1e-2, [[1.0]]), n_z=4)
    with pytest.raises(UsageError):
        solve_gap(strip, phi=np.ones(5))
