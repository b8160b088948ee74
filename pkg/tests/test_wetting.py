import math

import numpy as np
import pytest

from capdrop.analytic import exterior_drop_cap, interior_drop_cap
from capdrop.closure import close_with_spherical_patch
from capdrop.geometry import Sphere
from capdrop.shapes import flat_disk
from capdrop.wetting import (
    make_wetting_operator, surface_volume_gradient, surface_z_moment,
    surface_z_moment_gradient,
)


def fd_directional(mesh, f, grad, rng, eps=1e-5, n=4):
    """Worst relative error of grad against central differences."""
    g = grad()
    worst = 0.0
    for _ in range(n):
        d = rng.normal(size=mesh.vertices.shape)
        bnd = mesh.boundary_vertex_mask
        p = mesh.vertices[bnd]
        r = p / np.linalg.norm(p, axis=1, keepdims=True)
        d[bnd] -= r * np.sum(d[bnd] * r, axis=1, keepdims=True)
        v0 = mesh.vertices.copy()
        mesh.vertices[:] = v0 + eps * d
        fp = f()
        mesh.vertices[:] = v0 - eps * d
        fm = f()
        mesh.vertices[:] = v0
        fd = (fp - fm) / (2 * eps)
        an = float(np.sum(g * d))
        worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1e-9))
    return worst


@pytest.fixture(scope="module")
def bulge():
    drop = interior_drop_cap(1.0, math.radians(55.0), math.radians(110.0))
    mesh = drop.free_surface_mesh(n_angular=96, n_rings=48)
    op = make_wetting_operator(mesh, drop.substrate)
    return drop, mesh, op


def test_interior_orientation_and_area(bulge):
    drop, mesh, op = bulge
    assert op.side_sign == 1.0
    assert op.sign == -1.0
    assert op.area(mesh.vertices) == pytest.approx(drop.wetted_area, rel=2e-3)


def test_interior_volume_from_flux(bulge):
    drop, mesh, op = bulge
    vol = mesh.divergence_volume() + op.volume_term(mesh.vertices)
    assert vol == pytest.approx(drop.volume, rel=3e-3)


def test_dimple_volume_from_flux():
    drop = interior_drop_cap(1.0, math.radians(55.0), math.radians(40.0))
    mesh = drop.free_surface_mesh(n_angular=96, n_rings=48)
    op = make_wetting_operator(mesh, drop.substrate)
    vol = mesh.divergence_volume() + op.volume_term(mesh.vertices)
    assert vol == pytest.approx(drop.volume, rel=3e-3)


def test_exterior_orientation_and_volume():
    drop = exterior_drop_cap(1.0, 1.3, 0.7)
    mesh = drop.free_surface_mesh(n_angular=96, n_rings=48)
    op = make_wetting_operator(mesh, drop.substrate)
    assert op.side_sign == -1.0
    assert op.sign == 1.0
    assert op.area(mesh.vertices) == pytest.approx(drop.wetted_area, rel=2e-3)
    vol = mesh.divergence_volume() + op.volume_term(mesh.vertices)
    assert vol == pytest.approx(drop.volume, rel=3e-3)


def test_equatorial_disk_hemisphere_patch(unit_sphere):
    # great-circle boundary: no meshed closure exists, so this exercises the
    # winding-only calibration path
    disk = flat_disk(1.0, n_angular=128, n_rings=64, normal=(0.0, 0.0, -1.0))
    op = make_wetting_operator(disk, unit_sphere)
    assert op.area(disk.vertices) == pytest.approx(2 * math.pi, rel=2e-3)
    vol = disk.divergence_volume() + op.volume_term(disk.vertices)
    assert vol == pytest.approx(2 * math.pi / 3, rel=2e-3)
    assert op.pole[2] > 0.0


def test_equatorial_disk_flipped_drop(unit_sphere):
    disk = flat_disk(1.0, n_angular=128, n_rings=64, normal=(0.0, 0.0, 1.0))
    op = make_wetting_operator(disk, unit_sphere)
    vol = disk.divergence_volume() + op.volume_term(disk.vertices)
    assert vol == pytest.approx(2 * math.pi / 3, rel=2e-3)
    assert op.pole[2] < 0.0


def test_flipped_winding_selects_complement(unit_sphere):
    # the winding defines the drop: flipping it makes the complementary
    # region inside the ball the drop, wetting the far patch
    drop = interior_drop_cap(1.0, math.radians(55.0), math.radians(110.0))
    mesh = drop.free_surface_mesh(n_angular=96, n_rings=48).flipped()
    op = make_wetting_operator(mesh, unit_sphere)
    assert op.area(mesh.vertices) == pytest.approx(
        4 * math.pi - drop.wetted_area, rel=2e-3)
    vol = mesh.divergence_volume() + op.volume_term(mesh.vertices)
    assert vol == pytest.approx(4 * math.pi / 3 - drop.volume, rel=3e-3)


def test_side_mismatch_detected(unit_sphere):
    # declaring the wrong side flips the expected circulation orientation,
    # so no pole yields a positive patch area
    drop = interior_drop_cap(1.0, math.radians(55.0), math.radians(110.0))
    mesh = drop.free_surface_mesh(n_angular=48, n_rings=24)
    with pytest.raises(ValueError):
        make_wetting_operator(mesh, unit_sphere, side="exterior")


def test_offcenter_substrate_rejected():
    drop = interior_drop_cap(1.0, math.radians(55.0), math.radians(110.0))
    mesh = drop.free_surface_mesh(n_angular=48, n_rings=24)
    with pytest.raises(ValueError):
        make_wetting_operator(mesh, Sphere((0.5, 0.0, 0.0), 1.0))


def test_area_quadrature_second_order(unit_sphere):
    errs = []
    for n in (32, 64, 128):
        drop = interior_drop_cap(1.0, math.radians(55.0), math.radians(110.0))
        mesh = drop.free_surface_mesh(n_angular=n, n_rings=16)
        op = make_wetting_operator(mesh, drop.substrate)
        errs.append(abs(op.area(mesh.vertices) - drop.wetted_area))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.15)


def test_z_moment_matches_meshed_closure(bulge):
    drop, mesh, op = bulge
    region = close_with_spherical_patch(mesh, drop.substrate, side="near")
    assert region.signed_volume > 0
    m_ref = surface_z_moment(region.mesh.vertices, region.mesh.faces)
    m_op = surface_z_moment(mesh.vertices, mesh.faces) + op.z_moment_term(
        mesh.vertices)
    assert m_op == pytest.approx(m_ref, rel=2e-3)


def test_z_moment_of_ball_centered_at_height():
    # closed surface: moment is volume * centroid height
    from capdrop.shapes import icosphere
    m = icosphere(3, radius=0.4, center=(0.0, 0.0, 0.55))
    vol = m.enclosed_volume()
    mz = surface_z_moment(m.vertices, m.faces)
    assert mz == pytest.approx(vol * 0.55, rel=1e-6)


def test_area_gradient_fd(bulge, rng):
    drop, mesh, op = bulge
    w = fd_directional(mesh, lambda: op.area(mesh.vertices),
                       lambda: op.area_gradient(mesh.vertices), rng)
    assert w < 5e-7


def test_z_cubed_gradient_fd(bulge, rng):
    drop, mesh, op = bulge
    w = fd_directional(mesh, lambda: op.z_cubed_flux(mesh.vertices),
                       lambda: op.z_cubed_flux_gradient(mesh.vertices), rng)
    assert w < 5e-7


def test_surface_volume_gradient_fd(bulge, rng):
    drop, mesh, op = bulge
    w = fd_directional(mesh, mesh.divergence_volume,
                       lambda: surface_volume_gradient(mesh.vertices,
                                                       mesh.faces), rng)
    assert w < 5e-7


def test_surface_z_moment_gradient_fd(bulge, rng):
    drop, mesh, op = bulge
    w = fd_directional(
        mesh, lambda: surface_z_moment(mesh.vertices, mesh.faces),
        lambda: surface_z_moment_gradient(mesh.vertices, mesh.faces), rng)
    assert w < 5e-7
