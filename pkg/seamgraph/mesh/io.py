"""OBJ and PLY readers and writers, plus the JSON label sidecar."""

from __future__ import annotations

import json
import struct
from typing import TYPE_CHECKING, Any

import numpy as np

from ..errors import MeshError
from .core import Mesh, SeamLabels, validate_labels

if TYPE_CHECKING:
    from ..unwrap.parameterize import UvAtlas

_PLY_TYPES = {
    "char": "i1",
    "int8": "i1",
    "uchar": "u1",
    "uint8": "u1",
    "short": "i2",
    "int16": "i2",
    "ushort": "u2",
    "uint16": "u2",
    "int": "i4",
    "int32": "i4",
    "uint": "u4",
    "uint32": "u4",
    "float": "f4",
    "float32": "f4",
    "double": "f8",
    "float64": "f8",
}
_PLY_UV_NAMES = (("s", "t"), ("u", "v"), ("texture_u", "texture_v"))


def _obj_index(token: str, count: int, line_no: int) -> int:
    """Resolve a 1-based (or negative, relative) OBJ index to 0-based."""
    try:
        raw = int(token)
    except ValueError:
        raise MeshError(f"bad index {token!r}", line=line_no) from None
    if raw > 0:
        idx = raw - 1
    elif raw < 0:
        idx = count + raw
    else:
        raise MeshError("OBJ indices are 1-based; got 0", line=line_no)
    if not 0 <= idx < count:
        raise MeshError(f"index {raw} out of range ({count} available)", line=line_no)
    return idx


def _floats(parts: list[str], n: int, line_no: int) -> list[float]:
    if len(parts) < n:
        raise MeshError(f"expected {n} numbers, got {len(parts)}", line=line_no)
    try:
        return [float(p) for p in parts[:n]]
    except ValueError:
        raise MeshError(f"non-numeric value in {' '.join(parts)!r}", line=line_no) from None


def parse_obj(data: bytes, name: str = "mesh") -> Mesh:
    """Parse a triangulated Wavefront OBJ.

    Supports ``v``, ``vt``, ``vn`` and ``f`` records in the ``v``, ``v/vt``,
    ``v//vn`` and ``v/vt/vn`` forms. Normals are read but ignored; other record
    types (groups, materials, polylines) are skipped. Corner UVs are kept when
    every face references texture coordinates.
    """
    vertices: list[list[float]] = []
    texcoords: list[list[float]] = []
    normal_count = 0
    faces: list[list[int]] = []
    face_uvs: list[list[int] | None] = []

    text = data.decode("utf-8", errors="replace")
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        tag, *parts = line.split()
        if tag == "v":
            vertices.append(_floats(parts, 3, line_no))
        elif tag == "vt":
            texcoords.append(_floats(parts, 2, line_no))
        elif tag == "vn":
            _floats(parts, 3, line_no)
            normal_count += 1
        elif tag == "f":
            if len(parts) != 3:
                raise MeshError(
                    f"only triangles are supported, face has {len(parts)} vertices",
                    line=line_no,
                )
            corner_v: list[int] = []
            corner_t: list[int] = []
            for token in parts:
                fields = token.split("/")
                if len(fields) > 3 or not fields[0]:
                    raise MeshError(f"bad face token {token!r}", line=line_no)
                corner_v.append(_obj_index(fields[0], len(vertices), line_no))
                if len(fields) > 1 and fields[1]:
                    corner_t.append(_obj_index(fields[1], len(texcoords), line_no))
                if len(fields) > 2 and fields[2]:
                    _obj_index(fields[2], normal_count, line_no)
            if len(set(corner_v)) != 3:
                raise MeshError("repeated vertex in face", line=line_no)
            if corner_t and len(corner_t) != 3:
                raise MeshError("face mixes corners with and without UVs", line=line_no)
            faces.append(corner_v)
            face_uvs.append(corner_t or None)

    if not faces:
        raise MeshError("mesh has zero faces")

    corner_uvs = None
    with_uv = [uv is not None for uv in face_uvs]
    if all(with_uv):
        tc = np.asarray(texcoords, dtype=np.float64)
        corner_uvs = tc[np.asarray(face_uvs, dtype=np.int64)]
    elif any(with_uv):
        raise MeshError("some faces reference UVs and some do not")

    return Mesh(
        vertices=np.asarray(vertices, dtype=np.float64).reshape(-1, 3),
        faces=np.asarray(faces, dtype=np.int64),
        name=name,
        corner_uvs=corner_uvs,
    )


def _parse_ply_header(data: bytes) -> tuple[str, list[dict[str, Any]], int]:
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise MeshError("not a PLY file")
    body_start = data.index(b"\n", end) + 1
    lines = data[:end].decode("ascii", errors="replace").splitlines()

    fmt = ""
    elements: list[dict[str, Any]] = []
    for line_no, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts or parts[0] in ("ply", "comment", "obj_info"):
            continue
        if parts[0] == "format":
            fmt = parts[1]
            if fmt not in ("ascii", "binary_little_endian"):
                raise MeshError(f"unsupported PLY format {fmt!r}", line=line_no)
        elif parts[0] == "element":
            elements.append({"name": parts[1], "count": int(parts[2]), "props": []})
        elif parts[0] == "property":
            if not elements:
                raise MeshError("property before element", line=line_no)
            if parts[1] == "list":
                if parts[2] not in _PLY_TYPES or parts[3] not in _PLY_TYPES:
                    raise MeshError(f"unknown list types in {line!r}", line=line_no)
                prop = (parts[4], _PLY_TYPES[parts[2]], _PLY_TYPES[parts[3]])
            else:
                if parts[1] not in _PLY_TYPES:
                    raise MeshError(f"unknown property type {parts[1]!r}", line=line_no)
                prop = (parts[2], None, _PLY_TYPES[parts[1]])
            elements[-1]["props"].append(prop)
    if not fmt:
        raise MeshError("PLY header has no format line")
    return fmt, elements, body_start


def _read_ply_ascii(body: bytes, elements: list[dict[str, Any]]) -> dict[str, list]:
    tokens = body.split()
    pos = 0
    out: dict[str, list] = {}
    for element in elements:
        records = []
        for _ in range(element["count"]):
            record: dict[str, Any] = {}
            for prop_name, count_type, value_type in element["props"]:
                cast = float if value_type.startswith("f") else int
                if count_type is not None:
                    n = int(tokens[pos])
                    pos += 1
                    record[prop_name] = [cast(t) for t in tokens[pos : pos + n]]
                    pos += n
                else:
                    record[prop_name] = cast(tokens[pos])
                    pos += 1
            records.append(record)
        out[element["name"]] = records
    return out


def _read_ply_binary(body: bytes, elements: list[dict[str, Any]]) -> dict[str, list]:
    pos = 0
    out: dict[str, list] = {}
    for element in elements:
        records = []
        if all(count_type is None for _, count_type, _ in element["props"]):
            dtype = np.dtype([(name, "<" + vt) for name, _, vt in element["props"]])
            size = dtype.itemsize * element["count"]
            table = np.frombuffer(body[pos : pos + size], dtype=dtype, count=element["count"])
            pos += size
            for row in table:
                records.append({name: row[name].item() for name in dtype.names})
        else:
            for _ in range(element["count"]):
                record: dict[str, Any] = {}
                for prop_name, count_type, value_type in element["props"]:
                    if count_type is not None:
                        (n,) = struct.unpack_from("<" + np.dtype(count_type).char, body, pos)
                        pos += np.dtype(count_type).itemsize
                        fmt = f"<{n}{np.dtype(value_type).char}"
                        record[prop_name] = list(struct.unpack_from(fmt, body, pos))
                        pos += n * np.dtype(value_type).itemsize
                    else:
                        fmt = "<" + np.dtype(value_type).char
                        (record[prop_name],) = struct.unpack_from(fmt, body, pos)
                        pos += np.dtype(value_type).itemsize
                records.append(record)
        out[element["name"]] = records
    return out


def parse_ply(data: bytes, name: str = "mesh") -> Mesh:
    """Parse an ASCII or binary little-endian PLY triangle mesh.

    Per-vertex ``s``/``t`` (or ``u``/``v``) properties become corner UVs marked as
    vertex-uniform: such UVs cannot carry seams.
    """
    fmt, elements, body_start = _parse_ply_header(data)
    body = data[body_start:]
    try:
        if fmt == "ascii":
            records = _read_ply_ascii(body, elements)
        else:
            records = _read_ply_binary(body, elements)
    except (IndexError, ValueError, struct.error) as e:
        raise MeshError(f"truncated or malformed PLY body: {e}") from None

    vertex_records = records.get("vertex", [])
    face_records = records.get("face", [])
    if not face_records:
        raise MeshError("mesh has zero faces")
    try:
        vertices = [[r["x"], r["y"], r["z"]] for r in vertex_records]
    except KeyError as e:
        raise MeshError(f"vertex element lacks property {e}") from None

    faces = []
    for i, record in enumerate(face_records):
        indices = record.get("vertex_indices", record.get("vertex_index"))
        if indices is None:
            raise MeshError("face element lacks vertex_indices")
        if len(indices) != 3:
            raise MeshError(f"only triangles are supported, face {i} has {len(indices)} vertices")
        faces.append(indices)

    faces_arr = np.asarray(faces, dtype=np.int64)
    corner_uvs = None
    uniform = False
    if vertex_records:
        for u_name, v_name in _PLY_UV_NAMES:
            if u_name in vertex_records[0] and v_name in vertex_records[0]:
                uv = np.asarray([[r[u_name], r[v_name]] for r in vertex_records], dtype=np.float64)
                if faces_arr.size and faces_arr.max() < len(uv) and faces_arr.min() >= 0:
                    corner_uvs = uv[faces_arr]
                    uniform = True
                break

    return Mesh(
        vertices=np.asarray(vertices, dtype=np.float64).reshape(-1, 3),
        faces=faces_arr,
        name=name,
        corner_uvs=corner_uvs,
        uvs_vertex_uniform=uniform,
    )


def write_obj(
    mesh: Mesh,
    labels: SeamLabels | None = None,
    atlas: UvAtlas | None = None,
) -> bytes:
    """Serialize a mesh as OBJ.

    With an atlas (or authored corner UVs) each distinct (vertex, uv) pair becomes
    one ``vt`` record and faces use ``v/vt``, so vertices along seams get one
    ``vt`` per side. Seam labels, when given, are also written as ``l`` polyline
    records for viewers; ``parse_obj`` skips them.
    """
    lines = [f"# {mesh.name}"]
    lines.extend(f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist())

    corner_uvs = atlas.corner_uvs if atlas is not None else mesh.corner_uvs
    if corner_uvs is not None:
        vt_index: dict[tuple[int, float, float], int] = {}
        face_vt = np.zeros(mesh.faces.shape, dtype=np.int64)
        for f, face in enumerate(mesh.faces.tolist()):
            for k, v in enumerate(face):
                u, w = corner_uvs[f, k].tolist()
                key = (v, u, w)
                if key not in vt_index:
                    vt_index[key] = len(vt_index)
                    lines.append(f"vt {u!r} {w!r}")
                face_vt[f, k] = vt_index[key]
        for face, vts in zip(mesh.faces.tolist(), face_vt.tolist(), strict=True):
            corners = (f"{v + 1}/{t + 1}" for v, t in zip(face, vts, strict=True))
            lines.append("f " + " ".join(corners))
    else:
        lines.extend(f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist())

    if labels is not None:
        labels = validate_labels(mesh, labels)
        lines.extend(f"l {a + 1} {b + 1}" for a, b in mesh.edges[labels == 1].tolist())
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_ply(
    mesh: Mesh,
    vertex_colors: np.ndarray | None = None,
    binary: bool = False,
) -> bytes:
    """Serialize a mesh as PLY with optional per-vertex RGB colors (uint8)."""
    header = [
        "ply",
        f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
        f"comment {mesh.name}",
        f"element vertex {mesh.n_vertices}",
        "property double x",
        "property double y",
        "property double z",
    ]
    if vertex_colors is not None:
        vertex_colors = np.asarray(vertex_colors, dtype=np.uint8)
        if vertex_colors.shape != (mesh.n_vertices, 3):
            raise ValueError("vertex_colors must have shape (n_vertices, 3)")
        header += ["property uchar red", "property uchar green", "property uchar blue"]
    header += [
        f"element face {mesh.n_faces}",
        "property list uchar int vertex_indices",
        "end_header",
    ]
    head = ("\n".join(header) + "\n").encode("ascii")

    if binary:
        fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
        if vertex_colors is not None:
            fields += [("red", "u1"), ("green", "u1"), ("blue", "u1")]
        table = np.zeros(mesh.n_vertices, dtype=fields)
        table["x"], table["y"], table["z"] = mesh.vertices.T
        if vertex_colors is not None:
            table["red"], table["green"], table["blue"] = vertex_colors.T
        face_table = np.zeros(mesh.n_faces, dtype=[("n", "u1"), ("idx", "<i4", (3,))])
        face_table["n"] = 3
        face_table["idx"] = mesh.faces
        return head + table.tobytes() + face_table.tobytes()

    rows = []
    for i, (x, y, z) in enumerate(mesh.vertices.tolist()):
        row = f"{x!r} {y!r} {z!r}"
        if vertex_colors is not None:
            row += " " + " ".join(str(c) for c in vertex_colors[i].tolist())
        rows.append(row)
    rows.extend(f"3 {a} {b} {c}" for a, b, c in mesh.faces.tolist())
    return head + ("\n".join(rows) + "\n").encode("ascii")


def write_label_sidecar(mesh: Mesh, labels: SeamLabels) -> bytes:
    """JSON sidecar: mesh name, canonical edges and their seam labels."""
    labels = validate_labels(mesh, labels)
    payload = {
        "mesh": mesh.name,
        "edges": mesh.edges.tolist(),
        "labels": labels.tolist(),
    }
    return json.dumps(payload).encode("utf-8")


def read_label_sidecar(mesh: Mesh, data: bytes) -> SeamLabels:
    """Read a sidecar written for ``mesh``; the edge lists must agree."""
    payload = json.loads(data)
    edges = np.asarray(payload.get("edges", []), dtype=np.int64).reshape(-1, 2)
    if edges.shape != mesh.edges.shape or not np.array_equal(edges, mesh.edges):
        raise MeshError(f"label sidecar edges do not match mesh {mesh.name!r}")
    return validate_labels(mesh, payload["labels"])
