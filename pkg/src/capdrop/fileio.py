"""Mesh and profile file formats: ASCII OBJ, ASCII/binary PLY, profile CSV.

Floats are written with 17 significant digits, so an ASCII round trip
reproduces float64 values (and face order/winding) exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import UnknownFormatError
from .mesh import TriMesh

__all__ = [
    "write_obj", "read_obj", "write_ply", "read_ply",
    "write_profile_csv", "read_profile_csv", "load_mesh", "save_mesh",
]

_FMT = "%.17g"


def write_obj(mesh: TriMesh, path) -> None:
    """Write an ASCII OBJ file (v/f records only)."""
    lines = []
    for p in mesh.vertices:
        lines.append(f"v {_FMT % p[0]} {_FMT % p[1]} {_FMT % p[2]}")
    for f in mesh.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_obj(path) -> TriMesh:
    """Read an ASCII OBJ file; only v and f records are used.

    Face records may carry texture/normal slots (``f 1/1/1 ...``); the vertex
    index is taken.  Non-triangular faces are fan-triangulated.
    """
    verts: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="ascii") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "v":
                verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif parts[0] == "f":
                idx = [int(tok.split("/")[0]) - 1 for tok in parts[1:]]
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
    if not verts or not faces:
        raise UnknownFormatError(f"no usable v/f records in {path}")
    return TriMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64), validate=False)


def write_ply(mesh: TriMesh, path, binary: bool = True) -> None:
    """Write a PLY file with double-precision vertex coordinates."""
    n_v, n_f = mesh.n_vertices, mesh.n_faces
    fmt = "binary_little_endian" if binary else "ascii"
    header = (
        "ply\n"
        f"format {fmt} 1.0\n"
        f"element vertex {n_v}\n"
        "property double x\nproperty double y\nproperty double z\n"
        f"element face {n_f}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    if binary:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(mesh.vertices.astype("<f8").tobytes())
            face_dtype = np.dtype([("n", "u1"), ("v", "<i4", (3,))])
            rec = np.empty(n_f, dtype=face_dtype)
            rec["n"] = 3
            rec["v"] = mesh.faces.astype("<i4")
            fh.write(rec.tobytes())
    else:
        rows = [header.rstrip("\n")]
        for p in mesh.vertices:
            rows.append(f"{_FMT % p[0]} {_FMT % p[1]} {_FMT % p[2]}")
        for f in mesh.faces:
            rows.append(f"3 {f[0]} {f[1]} {f[2]}")
        Path(path).write_text("\n".join(rows) + "\n", encoding="ascii")


def _parse_ply_header(fh) -> tuple[str, list[tuple[str, int, list[tuple[str, str]]]]]:
    magic = fh.readline().strip()
    if magic != b"ply":
        raise UnknownFormatError("not a PLY file")
    fmt = None
    elements: list[tuple[str, int, list[tuple[str, str]]]] = []
    while True:
        line = fh.readline()
        if not line:
            raise UnknownFormatError("truncated PLY header")
        tokens = line.decode("ascii").strip().split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            fmt = tokens[1]
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if tokens[1] == "list":
                elements[-1][2].append(("list", f"{tokens[2]}:{tokens[3]}:{tokens[4]}"))
            else:
                elements[-1][2].append((tokens[2], tokens[1]))
        elif tokens[0] == "end_header":
            break
    if fmt not in ("ascii", "binary_little_endian"):
        raise UnknownFormatError(f"unsupported PLY format {fmt!r}")
    return fmt, elements


_PLY_SCALAR = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def read_ply(path) -> TriMesh:
    """Read ASCII or binary little-endian PLY (triangular faces only)."""
    with open(path, "rb") as fh:
        fmt, elements = _parse_ply_header(fh)
        verts = None
        faces = None
        for name, count, props in elements:
            if fmt == "ascii":
                rows = [fh.readline().decode("ascii").split() for _ in range(count)]
                if name == "vertex":
                    cols = [p[0] for p in props]
                    arr = np.asarray(rows, dtype=float)
                    verts = arr[:, [cols.index("x"), cols.index("y"), cols.index("z")]]
                elif name == "face":
                    faces = []
                    for row in rows:
                        n = int(row[0])
                        if n != 3:
                            raise UnknownFormatError("only triangular PLY faces are supported")
                        faces.append([int(row[1]), int(row[2]), int(row[3])])
                    faces = np.asarray(faces, dtype=np.int64)
            else:
                if name == "vertex":
                    dt = np.dtype([(p[0], "<" + _PLY_SCALAR[p[1]]) for p in props])
                    arr = np.frombuffer(fh.read(dt.itemsize * count), dtype=dt)
                    verts = np.column_stack([arr["x"], arr["y"], arr["z"]]).astype(float)
                elif name == "face":
                    if len(props) != 1 or props[0][0] != "list":
                        raise UnknownFormatError("unsupported PLY face properties")
                    count_t, index_t = props[0][1].split(":")[0:2]
                    cdt = _PLY_SCALAR[count_t]
                    idt = _PLY_SCALAR[index_t]
                    csz = np.dtype(cdt).itemsize
                    isz = np.dtype(idt).itemsize
                    faces = np.empty((count, 3), dtype=np.int64)
                    for i in range(count):
                        n = int(np.frombuffer(fh.read(csz), dtype="<" + cdt)[0])
                        if n != 3:
                            raise UnknownFormatError("only triangular PLY faces are supported")
                        faces[i] = np.frombuffer(fh.read(3 * isz), dtype="<" + idt)
        if verts is None or faces is None:
            raise UnknownFormatError(f"PLY file {path} lacks vertex or face elements")
        return TriMesh(verts, faces, validate=False)


def write_profile_csv(path, s, x, z, psi, first_integral) -> None:
    """Write a meridian profile table: arclength, x, z, tangent angle, first integral."""
    cols = [np.asarray(c, dtype=float) for c in (s, x, z, psi, first_integral)]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("profile columns must have equal length")
    rows = ["s,x,z,psi,first_integral"]
    for i in range(n):
        rows.append(",".join(_FMT % c[i] for c in cols))
    Path(path).write_text("\n".join(rows) + "\n", encoding="ascii")


def read_profile_csv(path) -> dict[str, np.ndarray]:
    """Read a profile CSV written by :func:`write_profile_csv`."""
    text = Path(path).read_text(encoding="ascii").strip().splitlines()
    header = [h.strip() for h in text[0].split(",")]
    expected = ["s", "x", "z", "psi", "first_integral"]
    if header != expected:
        raise UnknownFormatError(f"profile CSV must have columns {expected}, got {header}")
    data = np.asarray([[float(v) for v in line.split(",")] for line in text[1:]])
    return {name: data[:, k] for k, name in enumerate(expected)}


def load_mesh(path) -> TriMesh:
    """Load a mesh by file extension (.obj or .ply)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        return read_obj(path)
    if suffix == ".ply":
        return read_ply(path)
    raise UnknownFormatError(f"unknown mesh format {suffix!r} for {path}")


def save_mesh(mesh: TriMesh, path, **kwargs) -> None:
    """Save a mesh by file extension (.obj or .ply)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        write_obj(mesh, path)
    elif suffix == ".ply":
        write_ply(mesh, path, **kwargs)
    else:
        raise UnknownFormatError(f"unknown mesh format {suffix!r} for {path}")
