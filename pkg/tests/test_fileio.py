import numpy as np
import pytest

from capdrop.errors import UnknownFormatError
from capdrop.fileio import (
    load_mesh, read_obj, read_ply, read_profile_csv, save_mesh,
    write_obj, write_ply, write_profile_csv,
)
from capdrop.shapes import flat_disk, icosphere


def test_obj_roundtrip_exact(tmp_path):
    m = icosphere(2, radius=1.37, center=(0.1, -0.2, 0.3))
    p = tmp_path / "m.obj"
    write_obj(m, p)
    back = read_obj(p)
    # 17 significant digits round-trip float64 exactly
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.faces, m.faces)


def test_ply_binary_roundtrip_exact(tmp_path):
    m = flat_disk(1.0, n_angular=20, n_rings=3)
    p = tmp_path / "m.ply"
    write_ply(m, p, binary=True)
    back = read_ply(p)
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.faces, m.faces)


def test_ply_ascii_roundtrip_exact(tmp_path):
    m = icosphere(1)
    p = tmp_path / "m_ascii.ply"
    write_ply(m, p, binary=False)
    back = read_ply(p)
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.faces, m.faces)


def test_obj_ignores_comments_and_extras(tmp_path):
    p = tmp_path / "hand.obj"
    p.write_text(
        "# comment\n"
        "v 0 0 0\nv 1 0 0\nv 0 1 0\n"
        "vn 0 0 1\n"
        "f 1//1 2//1 3//1\n")
    m = read_obj(p)
    assert m.n_vertices == 3
    assert m.n_faces == 1


def test_load_save_dispatch(tmp_path):
    m = icosphere(1)
    for name in ("a.obj", "b.ply"):
        path = tmp_path / name
        save_mesh(m, path)
        back = load_mesh(path)
        assert np.array_equal(back.vertices, m.vertices)


def test_unknown_format_raises(tmp_path):
    m = icosphere(0)
    with pytest.raises(UnknownFormatError):
        save_mesh(m, tmp_path / "m.stl")
    (tmp_path / "m.xyz").write_text("0 0 0\n")
    with pytest.raises(UnknownFormatError):
        load_mesh(tmp_path / "m.xyz")


def test_profile_csv_roundtrip(tmp_path):
    s = np.linspace(0.0, 2.0, 40)
    x = 1.0 + 0.2 * np.sin(s)
    z = s.copy()
    psi = 0.1 * np.cos(s)
    fi = x * np.sin(psi) - 0.5 * x ** 2
    p = tmp_path / "prof.csv"
    write_profile_csv(p, s, x, z, psi, fi)
    data = read_profile_csv(p)
    for key, ref in (("s", s), ("x", x), ("z", z), ("psi", psi),
                     ("first_integral", fi)):
        assert np.array_equal(data[key], ref)
