"""Mesh readers and writers for OBJ, PLY (ascii + binary) and glTF 2.0.

Only positions and triangle indices are interpreted; everything else is
ignored on read and omitted on write. glTF files are Y-up on disk and
converted to the package's Z-up convention at ingest (and back on save).
All writers are deterministic: identical meshes produce identical bytes.
"""

from __future__ import annotations

import base64
import json
import logging
import struct
from pathlib import Path

import numpy as np

from sceneedit.errors import IoError, ParseError, UnsupportedFormat
from sceneedit.mesh.core import TriangleMesh, compute_vertex_normals, drop_degenerate_faces

logger = logging.getLogger(__name__)

_SUFFIX_FORMAT = {".obj": "obj", ".ply": "ply", ".gltf": "gltf", ".glb": "gltf"}

_GLTF_COMPONENT = {5120: "i1", 5121: "u1", 5122: "i2", 5123: "u2", 5125: "u4", 5126: "f4"}
_GLTF_NCOMP = {"SCALAR": 1, "VEC2": 2, "VEC3": 3, "VEC4": 4, "MAT4": 16}


def _format_for(path: Path, format: str | None) -> str:
    fmt = format or _SUFFIX_FORMAT.get(path.suffix.lower())
    if fmt not in ("obj", "ply", "gltf"):
        raise UnsupportedFormat(f"unsupported mesh format {format or path.suffix!r}")
    return fmt


def load_mesh(path: str | Path, format: str | None = None, compute_normals: bool = True) -> TriangleMesh:
    """Read a mesh; units are assumed meters, result is Z-up.

    Degenerate faces (area < 1e-12 m^2) are dropped with a logged count.
    """
    path = Path(path)
    fmt = _format_for(path, format)
    if not path.exists():
        raise IoError(f"mesh file does not exist: {path}")
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if fmt == "obj":
        mesh = _parse_obj(raw, path)
    elif fmt == "ply":
        mesh = _parse_ply(raw, path)
    else:
        mesh = _parse_gltf(raw, path)
    mesh, dropped = drop_degenerate_faces(mesh)
    if dropped:
        logger.warning("%s: dropped %d degenerate faces at load", path.name, dropped)
    if compute_normals and len(mesh.faces):
        mesh = compute_vertex_normals(mesh)
    return mesh.with_name(path.stem)


def save_mesh(mesh: TriangleMesh, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = _format_for(path, format)
    if fmt == "obj":
        data = _write_obj(mesh)
    elif fmt == "ply":
        data = _write_ply(mesh)
    elif path.suffix.lower() == ".gltf":
        data = _write_gltf_json(mesh)
    else:
        data = export_glb(mesh)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# --- OBJ ---------------------------------------------------------------------

def _parse_obj(raw: bytes, path: Path) -> TriangleMesh:
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    try:
        text = raw.decode("utf-8", errors="replace")
    except Exception as exc:  # pragma: no cover - decode with replace cannot fail
        raise ParseError(f"{path}: undecodable OBJ: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if parts[0] == "v":
            if len(parts) < 4:
                raise ParseError(f"{path}:{lineno}: vertex needs 3 coordinates")
            try:
                vertices.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: bad vertex coordinate") from exc
        elif parts[0] == "f":
            if len(parts) < 4:
                raise ParseError(f"{path}:{lineno}: face needs >= 3 vertices")
            idx = []
            for token in parts[1:]:
                head = token.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError as exc:
                    raise ParseError(f"{path}:{lineno}: bad face index {token!r}") from exc
                idx.append(i - 1 if i > 0 else len(vertices) + i)
            for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                faces.append((idx[0], idx[k], idx[k + 1]))
    if not vertices:
        raise ParseError(f"{path}: no vertices found")
    try:
        return TriangleMesh(np.array(vertices), np.array(faces).reshape(-1, 3))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _write_obj(mesh: TriangleMesh) -> bytes:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
    for f in mesh.faces:
        lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- PLY ---------------------------------------------------------------------

def _parse_ply(raw: bytes, path: Path) -> TriangleMesh:
    try:
        end = raw.index(b"end_header\n") + len(b"end_header\n")
    except ValueError as exc:
        raise ParseError(f"{path}: missing PLY end_header") from exc
    header = raw[:end].decode("ascii", errors="replace").splitlines()
    if not header or header[0].strip() != "ply":
        raise ParseError(f"{path}: not a PLY file")
    fmt = None
    elements: list[tuple[str, int, list[tuple[str, str, str | None]]]] = []
    for line in header[1:]:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ParseError(f"{path}: property before element")
            if parts[1] == "list":
                elements[-1][2].append((parts[4], parts[3], parts[2]))
            else:
                elements[-1][2].append((parts[2], parts[1], None))
    if fmt not in ("ascii", "binary_little_endian"):
        raise ParseError(f"{path}: unsupported PLY format {fmt!r}")

    body = raw[end:]
    vertices = None
    faces: list[tuple[int, int, int]] = []
    _PLY_NP = {"float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
               "uchar": "u1", "uint8": "u1", "char": "i1", "int8": "i1",
               "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
               "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4"}

    def np_type(name):
        if name not in _PLY_NP:
            raise ParseError(f"{path}: unsupported PLY property type {name!r}")
        return _PLY_NP[name]

    if fmt == "ascii":
        tokens = body.decode("ascii", errors="replace").split("\n")
        cursor = 0
        for name, count, props in elements:
            if name == "vertex":
                cols = [p[0] for p in props]
                try:
                    xi, yi, zi = cols.index("x"), cols.index("y"), cols.index("z")
                except ValueError as exc:
                    raise ParseError(f"{path}: vertex element lacks x/y/z") from exc
                vertices = np.empty((count, 3))
                for i in range(count):
                    row = tokens[cursor + i].split()
                    vertices[i] = (float(row[xi]), float(row[yi]), float(row[zi]))
                cursor += count
            elif name == "face":
                for i in range(count):
                    row = tokens[cursor + i].split()
                    k = int(row[0])
                    idx = [int(t) for t in row[1:1 + k]]
                    for j in range(1, k - 1):
                        faces.append((idx[0], idx[j], idx[j + 1]))
                cursor += count
            else:
                cursor += count
    else:
        offset = 0
        for name, count, props in elements:
            if name == "vertex":
                dtype = np.dtype([(p[0], np.dtype(np_type(p[1])).newbyteorder("<")) for p in props])
                arr = np.frombuffer(body, dtype=dtype, count=count, offset=offset)
                offset += dtype.itemsize * count
                try:
                    vertices = np.stack(
                        [arr["x"], arr["y"], arr["z"]], axis=1
                    ).astype(np.float64)
                except KeyError as exc:
                    raise ParseError(f"{path}: vertex element lacks x/y/z") from exc
            elif name == "face":
                if len(props) != 1 or props[0][2] is None:
                    raise ParseError(f"{path}: face element must be a single list property")
                count_t = np.dtype(np_type(props[0][2])).newbyteorder("<")
                index_t = np.dtype(np_type(props[0][1])).newbyteorder("<")
                for _ in range(count):
                    k = int(np.frombuffer(body, dtype=count_t, count=1, offset=offset)[0])
                    offset += count_t.itemsize
                    idx = np.frombuffer(body, dtype=index_t, count=k, offset=offset)
                    offset += index_t.itemsize * k
                    for j in range(1, k - 1):
                        faces.append((int(idx[0]), int(idx[j]), int(idx[j + 1])))
            else:  # skip unknown fixed-size elements
                width = sum(np.dtype(np_type(p[1])).itemsize for p in props if p[2] is None)
                offset += width * count
    if vertices is None:
        raise ParseError(f"{path}: no vertex element")
    try:
        return TriangleMesh(vertices, np.array(faces, dtype=np.int64).reshape(-1, 3))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _write_ply(mesh: TriangleMesh) -> bytes:
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {len(mesh.vertices)}\n"
        "property double x\n"
        "property double y\n"
        "property double z\n"
        f"element face {len(mesh.faces)}\n"
        "property list uchar uint vertex_indices\n"
        "end_header\n"
    ).encode("ascii")
    vert = mesh.vertices.astype("<f8").tobytes()
    face_dtype = np.dtype([("n", "u1"), ("idx", "<u4", (3,))])
    face_arr = np.empty(len(mesh.faces), dtype=face_dtype)
    face_arr["n"] = 3
    face_arr["idx"] = mesh.faces.astype("<u4")
    return header + vert + face_arr.tobytes()


# --- glTF 2.0 ----------------------------------------------------------------

_YUP_TO_ZUP = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def _parse_gltf(raw: bytes, path: Path) -> TriangleMesh:
    if raw[:4] == b"glTF":
        doc, bin_chunk = _split_glb(raw, path)
    else:
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}: not JSON glTF: {exc}") from exc
        bin_chunk = None
    buffers = []
    for buf in doc.get("buffers", []):
        uri = buf.get("uri")
        if uri is None:
            if bin_chunk is None:
                raise ParseError(f"{path}: buffer without uri outside GLB")
            buffers.append(bin_chunk)
        elif uri.startswith("data:"):
            buffers.append(base64.b64decode(uri.split(",", 1)[1]))
        else:
            buffers.append((path.parent / uri).read_bytes())

    def read_accessor(index: int) -> np.ndarray:
        acc = doc["accessors"][index]
        view = doc["bufferViews"][acc["bufferView"]]
        comp = _GLTF_COMPONENT.get(acc["componentType"])
        if comp is None:
            raise ParseError(f"{path}: unsupported componentType {acc['componentType']}")
        ncomp = _GLTF_NCOMP[acc["type"]]
        dtype = np.dtype(comp).newbyteorder("<")
        offset = view.get("byteOffset", 0) + acc.get("byteOffset", 0)
        stride = view.get("byteStride")
        buf = buffers[view["buffer"]]
        if stride and stride != dtype.itemsize * ncomp:
            rows = []
            for i in range(acc["count"]):
                rows.append(np.frombuffer(buf, dtype=dtype, count=ncomp, offset=offset + i * stride))
            return np.stack(rows)
        data = np.frombuffer(buf, dtype=dtype, count=acc["count"] * ncomp, offset=offset)
        return data.reshape(acc["count"], ncomp) if ncomp > 1 else data

    def node_matrix(node: dict) -> np.ndarray:
        if "matrix" in node:
            return np.array(node["matrix"], dtype=np.float64).reshape(4, 4).T
        m = np.eye(4)
        if "scale" in node:
            m = m @ np.diag(list(node["scale"]) + [1.0])
        if "rotation" in node:
            x, y, z, w = node["rotation"]
            rot = np.array([
                [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
                [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
                [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
            ])
            rm = np.eye(4)
            rm[:3, :3] = rot
            m = rm @ m
        if "translation" in node:
            tm = np.eye(4)
            tm[:3, 3] = node["translation"]
            m = tm @ m
        return m

    all_vertices: list[np.ndarray] = []
    all_faces: list[np.ndarray] = []

    def visit(node_idx: int, parent: np.ndarray) -> None:
        node = doc["nodes"][node_idx]
        m = parent @ node_matrix(node)
        if "mesh" in node:
            for prim in doc["meshes"][node["mesh"]].get("primitives", []):
                if prim.get("mode", 4) != 4:
                    logger.warning("%s: skipping non-triangle primitive", path.name)
                    continue
                if "POSITION" not in prim.get("attributes", {}):
                    continue
                pos = read_accessor(prim["attributes"]["POSITION"]).astype(np.float64)
                pos = pos @ m[:3, :3].T + m[:3, 3]
                if "indices" in prim:
                    idx = read_accessor(prim["indices"]).astype(np.int64).reshape(-1, 3)
                else:
                    idx = np.arange(len(pos), dtype=np.int64).reshape(-1, 3)
                base = sum(len(v) for v in all_vertices)
                all_vertices.append(pos)
                all_faces.append(idx + base)
        for child in node.get("children", []):
            visit(child, m)

    scene_idx = doc.get("scene", 0)
    scenes = doc.get("scenes", [])
    roots = scenes[scene_idx]["nodes"] if scenes else range(len(doc.get("nodes", [])))
    for root in roots:
        visit(root, np.eye(4))
    if not all_vertices:
        raise ParseError(f"{path}: glTF contains no triangle geometry")
    vertices = np.vstack(all_vertices) @ _YUP_TO_ZUP.T
    faces = np.vstack(all_faces)
    try:
        return TriangleMesh(vertices, faces)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _split_glb(raw: bytes, path: Path) -> tuple[dict, bytes | None]:
    if len(raw) < 12:
        raise ParseError(f"{path}: truncated GLB header")
    magic, version, _length = struct.unpack("<III", raw[:12])
    if version != 2:
        raise ParseError(f"{path}: GLB version {version} unsupported")
    offset = 12
    doc = None
    bin_chunk = None
    while offset + 8 <= len(raw):
        chunk_len, chunk_type = struct.unpack("<II", raw[offset:offset + 8])
        chunk = raw[offset + 8:offset + 8 + chunk_len]
        if chunk_type == 0x4E4F534A:  # JSON
            doc = json.loads(chunk.decode("utf-8"))
        elif chunk_type == 0x004E4942:  # BIN
            bin_chunk = chunk
        offset += 8 + chunk_len
    if doc is None:
        raise ParseError(f"{path}: GLB has no JSON chunk")
    return doc, bin_chunk


def _gltf_doc(mesh: TriangleMesh, buffer_len: int, pos_bytes: int, pos: np.ndarray) -> dict:
    return {
        "asset": {"version": "2.0", "generator": "sceneedit"},
        "scene": 0,
        "scenes": [{"nodes": [0]}],
        "nodes": [{"mesh": 0}],
        "meshes": [{"primitives": [{"attributes": {"POSITION": 0}, "indices": 1, "mode": 4}]}],
        "accessors": [
            {
                "bufferView": 0,
                "componentType": 5126,
                "count": len(mesh.vertices),
                "type": "VEC3",
                "min": [float(x) for x in pos.min(axis=0)] if len(pos) else [0, 0, 0],
                "max": [float(x) for x in pos.max(axis=0)] if len(pos) else [0, 0, 0],
            },
            {
                "bufferView": 1,
                "componentType": 5125,
                "count": int(mesh.faces.size),
                "type": "SCALAR",
            },
        ],
        "bufferViews": [
            {"buffer": 0, "byteOffset": 0, "byteLength": pos_bytes, "target": 34962},
            {"buffer": 0, "byteOffset": pos_bytes, "byteLength": mesh.faces.size * 4, "target": 34963},
        ],
        "buffers": [{"byteLength": buffer_len}],
    }


def _gltf_payload(mesh: TriangleMesh) -> tuple[dict, bytes]:
    pos = (mesh.vertices @ _YUP_TO_ZUP).astype("<f4")  # Z-up -> Y-up on disk
    pos_bytes = pos.size * 4
    idx = mesh.faces.astype("<u4")
    bin_data = pos.tobytes() + idx.tobytes()
    pad = (-len(bin_data)) % 4
    bin_data += b"\x00" * pad
    doc = _gltf_doc(mesh, len(bin_data), pos_bytes, pos.astype(np.float64))
    return doc, bin_data


def export_glb(mesh: TriangleMesh) -> bytes:
    """Serialize to a GLB container; output bytes are deterministic."""
    doc, bin_data = _gltf_payload(mesh)
    doc_json = json.dumps(doc, separators=(",", ":"), sort_keys=True).encode("utf-8")
    doc_json += b" " * ((-len(doc_json)) % 4)
    total = 12 + 8 + len(doc_json) + 8 + len(bin_data)
    out = bytearray()
    out += struct.pack("<III", 0x46546C67, 2, total)
    out += struct.pack("<II", len(doc_json), 0x4E4F534A) + doc_json
    out += struct.pack("<II", len(bin_data), 0x004E4942) + bin_data
    return bytes(out)


def _write_gltf_json(mesh: TriangleMesh) -> bytes:
    doc, bin_data = _gltf_payload(mesh)
    uri = "data:application/octet-stream;base64," + base64.b64encode(bin_data).decode("ascii")
    doc["buffers"][0]["uri"] = uri
    return json.dumps(doc, separators=(",", ":"), sort_keys=True).encode("utf-8")
