import math

import numpy as np
import pytest

from capdrop.analytic import interior_drop_cap
from capdrop.closure import (
    Containment, close_with_spherical_patch, signed_containment,
)
from capdrop.errors import (
    AlreadyClosedError, BoundaryOffSphereError, LoopsNotInHemisphereError,
)
from capdrop.geometry import Sphere
from capdrop.shapes import flat_disk, icosphere, spherical_cap_mesh


def cap_partition_surfaces(unit_sphere):
    drop = interior_drop_cap(1.0, math.radians(50.0), math.radians(115.0))
    return drop, drop.free_surface_mesh(n_angular=96, n_rings=48)


def test_near_and_far_closures_partition_ball(unit_sphere):
    drop, free = cap_partition_surfaces(unit_sphere)
    near = close_with_spherical_patch(free, unit_sphere, side="near")
    far = close_with_spherical_patch(free, unit_sphere, side="far")
    ball = 4 * math.pi / 3
    assert near.volume + far.volume == pytest.approx(ball, rel=5e-3)
    # patch areas partition the sphere
    assert near.patch_area() + far.patch_area() == pytest.approx(
        4 * math.pi, rel=5e-3)
    assert near.mesh.is_closed and far.mesh.is_closed


def test_drop_closure_matches_analytic_volume(unit_sphere):
    drop, free = cap_partition_surfaces(unit_sphere)
    near = close_with_spherical_patch(free, unit_sphere, side="near")
    region = near
    if region.signed_volume < 0:
        region = close_with_spherical_patch(free, unit_sphere, side="far")
    assert region.signed_volume > 0
    assert region.volume == pytest.approx(drop.volume, rel=5e-3)


def test_closure_patch_face_mask_splits_mesh(unit_sphere):
    drop, free = cap_partition_surfaces(unit_sphere)
    near = close_with_spherical_patch(free, unit_sphere, side="near")
    assert near.patch_face_mask.sum() > 0
    assert near.surface_face_mask().sum() == free.n_faces
    # patch faces sit on the substrate sphere
    centers = near.mesh.vertices[near.mesh.faces[near.patch_face_mask]].mean(axis=1)
    assert np.abs(np.linalg.norm(centers, axis=1) - 1.0).max() < 5e-3


def test_closure_rejects_closed_mesh(unit_sphere):
    with pytest.raises(AlreadyClosedError):
        close_with_spherical_patch(icosphere(1), unit_sphere)


def test_closure_rejects_boundary_off_sphere(unit_sphere):
    disk = flat_disk(0.8, n_angular=32, n_rings=4)  # radius 0.8 at z=0
    with pytest.raises(BoundaryOffSphereError):
        close_with_spherical_patch(disk, unit_sphere)


def test_closure_rejects_great_circle_loop(unit_sphere):
    disk = flat_disk(1.0, n_angular=64, n_rings=8)
    with pytest.raises(LoopsNotInHemisphereError):
        close_with_spherical_patch(disk, unit_sphere, side="near")


def test_closure_far_rejects_multiple_loops(unit_sphere):
    # equatorial band: two boundary loops with disjoint near caps
    band = spherical_cap_mesh(unit_sphere, np.array([0.0, 0.0, 1.0]),
                              math.radians(120.0), n_angular=48, n_rings=48)
    mid = band.vertices[band.faces].mean(axis=1)[:, 2] < math.cos(
        math.radians(60.0))
    band = band.submesh(mid)
    assert len(band.boundary_loops()) == 2
    near = close_with_spherical_patch(band, unit_sphere, side="near")
    assert near.mesh.is_closed
    with pytest.raises(ValueError):
        close_with_spherical_patch(band, unit_sphere, side="far")


def test_signed_containment_labels(unit_sphere):
    drop, free = cap_partition_surfaces(unit_sphere)
    region = close_with_spherical_patch(free, unit_sphere, side="near")
    if region.signed_volume < 0:
        region = close_with_spherical_patch(free, unit_sphere, side="far")
    apex = drop.carrier.center + drop.carrier.radius * np.array([0, 0, -1.0])
    inside = 0.5 * (apex + np.array([0.0, 0.0, drop.contact_height]))
    below = np.array([0.0, 0.0, 0.5 * (apex[2] - 1.0)])
    pts = np.array([
        inside,
        below,                      # inside ball, below the drop
        [2.0, 0.0, 0.0],            # outside everything
        apex,                       # on the free surface
    ])
    labels = signed_containment(region, pts)
    assert labels[0] == Containment.INSIDE
    assert labels[1] == Containment.OUTSIDE
    assert labels[2] == Containment.OUTSIDE
    assert labels[3] == Containment.ON_BOUNDARY


def test_signed_containment_winding_independent():
    m = icosphere(2)
    pts = np.array([[0.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    a = signed_containment(m, pts)
    b = signed_containment(m.flipped(), pts)
    assert np.array_equal(a, b)
    assert a[0] == Containment.INSIDE and a[1] == Containment.OUTSIDE
