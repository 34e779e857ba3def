"""XYZ and PLY point files.

XYZ is the canonical format: one ``x y z`` line per point, ``#`` comments
and blank lines ignored. PLY support covers vertex positions only, ASCII or
binary little-endian.
"""

from __future__ import annotations

import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .pointcloud import EmptyInputError, as_cloud


class PointFileError(ValueError):
    pass


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to ``path`` through a temporary file and an atomic rename."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise PointFileError(f"{path}: cannot read ({exc.strerror or exc})") from exc


def parse_xyz(text: str, source: str = "<string>") -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 3:
            raise PointFileError(f"{source}: line {lineno}: expected 3 coordinates, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise PointFileError(f"{source}: line {lineno}: not a number in {stripped!r}") from None
    if not rows:
        raise EmptyInputError(source)
    pts = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(pts)):
        bad = int(np.flatnonzero(~np.isfinite(pts).all(axis=1))[0])
        raise PointFileError(f"{source}: point {bad + 1} has a non-finite coordinate")
    return pts


def read_xyz(path) -> np.ndarray:
    try:
        text = _read_bytes(path).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise PointFileError(f"{path}: not UTF-8 text") from exc
    return parse_xyz(text, str(path))


def format_xyz(cloud) -> str:
    pts = as_cloud(cloud)
    return "".join(f"{x:.17g} {y:.17g} {z:.17g}\n" for x, y, z in pts)


def write_xyz(cloud, path) -> None:
    try:
        atomic_write(path, format_xyz(cloud).encode("utf-8"))
    except OSError as exc:
        raise PointFileError(f"{path}: cannot write ({exc.strerror or exc})") from exc


# -- PLY ----------------------------------------------------------------------

_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def _ply_type(name: str, lineno: int, line: str) -> str:
    try:
        return _PLY_TYPES[name]
    except KeyError:
        raise PointFileError(f"PLY header line {lineno}: unknown type {name!r} in {line!r}") from None


def _parse_ply_header(data: bytes):
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise PointFileError("PLY header line 1: file does not start with 'ply' or has no 'end_header'")
    body_start = data.find(b"\n", end) + 1
    if body_start == 0:
        body_start = len(data)
    lines = data[:end].decode("ascii", errors="replace").splitlines()
    fmt = None
    elements = []  # (name, count, [(prop, dtype, count_dtype or None)])
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        words = line.split()
        if lineno == 1:
            if line != "ply":
                raise PointFileError(f"PLY header line 1: expected 'ply', got {line!r}")
            continue
        if not words or words[0] in ("comment", "obj_info"):
            continue
        if words[0] == "format":
            if len(words) != 3:
                raise PointFileError(f"PLY header line {lineno}: malformed format line {line!r}")
            fmt = words[1]
            if fmt == "binary_big_endian":
                raise PointFileError(f"PLY header line {lineno}: big-endian PLY is not supported")
            if fmt not in ("ascii", "binary_little_endian"):
                raise PointFileError(f"PLY header line {lineno}: unknown format {fmt!r}")
        elif words[0] == "element":
            if len(words) != 3 or not words[2].isdigit():
                raise PointFileError(f"PLY header line {lineno}: malformed element line {line!r}")
            elements.append((words[1], int(words[2]), []))
        elif words[0] == "property":
            if not elements:
                raise PointFileError(f"PLY header line {lineno}: property before any element")
            if len(words) == 5 and words[1] == "list":
                elements[-1][2].append((words[4], _ply_type(words[3], lineno, line),
                                        _ply_type(words[2], lineno, line)))
            elif len(words) == 3:
                elements[-1][2].append((words[2], _ply_type(words[1], lineno, line), None))
            else:
                raise PointFileError(f"PLY header line {lineno}: malformed property line {line!r}")
        else:
            raise PointFileError(f"PLY header line {lineno}: unrecognized keyword in {line!r}")
    if fmt is None:
        raise PointFileError("PLY header: missing format line")
    return fmt, elements, body_start


def _vertex_columns(props, source) -> list[int]:
    names = [p[0] for p in props]
    missing = [c for c in "xyz" if c not in names]
    if missing:
        raise PointFileError(f"{source}: vertex element lacks propert{'y' if len(missing) == 1 else 'ies'} "
                             f"{', '.join(missing)}")
    for c in "xyz":
        if props[names.index(c)][2] is not None:
            raise PointFileError(f"{source}: vertex property {c} is a list")
    return [names.index(c) for c in "xyz"]


def _read_ascii_body(body: bytes, elements, source) -> np.ndarray:
    tokens = body.decode("ascii", errors="replace").split()
    pos = 0
    for name, count, props in elements:
        records = []
        for _ in range(count):
            record = []
            for _, _, count_type in props:
                if pos >= len(tokens):
                    raise PointFileError(f"{source}: PLY data ends early in element {name!r}")
                if count_type is None:
                    record.append(tokens[pos])
                    pos += 1
                else:
                    k = int(float(tokens[pos]))
                    record.append(tokens[pos + 1:pos + 1 + k])
                    pos += 1 + k
            records.append(record)
        if name == "vertex":
            cols = _vertex_columns(props, source)
            try:
                return np.array([[float(r[c]) for c in cols] for r in records], dtype=np.float64).reshape(-1, 3)
            except ValueError:
                raise PointFileError(f"{source}: non-numeric vertex coordinate") from None
    raise PointFileError(f"{source}: PLY file has no vertex element")


def _read_binary_body(body: bytes, elements, source) -> np.ndarray:
    offset = 0
    for name, count, props in elements:
        if all(p[2] is None for p in props):
            dtype = np.dtype([(f"f{k}", "<" + p[1]) for k, p in enumerate(props)])
            size = dtype.itemsize * count
            if offset + size > len(body):
                raise PointFileError(f"{source}: PLY data ends early in element {name!r}")
            if name == "vertex":
                cols = _vertex_columns(props, source)
                arr = np.frombuffer(body, dtype=dtype, count=count, offset=offset)
                return np.column_stack([arr[f"f{c}"].astype(np.float64) for c in cols]).reshape(-1, 3)
            offset += size
            continue
        if name == "vertex":
            _vertex_columns(props, source)
        for _ in range(count):
            for _, item_type, count_type in props:
                if count_type is None:
                    offset += np.dtype(item_type).itemsize
                else:
                    k = int(np.frombuffer(body, dtype="<" + count_type, count=1, offset=offset)[0])
                    offset += np.dtype(count_type).itemsize + k * np.dtype(item_type).itemsize
        if name == "vertex":
            raise PointFileError(f"{source}: list properties in the vertex element are not supported")
    raise PointFileError(f"{source}: PLY file has no vertex element")


def read_ply(path) -> np.ndarray:
    data = _read_bytes(path)
    try:
        fmt, elements, body_start = _parse_ply_header(data)
    except PointFileError as exc:
        raise PointFileError(f"{path}: {exc}") from None
    body = data[body_start:]
    if fmt == "ascii":
        pts = _read_ascii_body(body, elements, str(path))
    else:
        pts = _read_binary_body(body, elements, str(path))
    if pts.shape[0] == 0:
        raise EmptyInputError(str(path))
    if not np.all(np.isfinite(pts)):
        raise PointFileError(f"{path}: non-finite vertex coordinate")
    return pts


def format_ply(cloud, binary: bool = True) -> bytes:
    pts = as_cloud(cloud)
    fmt = "binary_little_endian" if binary else "ascii"
    header = (f"ply\nformat {fmt} 1.0\nelement vertex {pts.shape[0]}\n"
              "property double x\nproperty double y\nproperty double z\nend_header\n").encode("ascii")
    if binary:
        return header + pts.astype("<f8").tobytes()
    return header + format_xyz(pts).encode("ascii")


def write_ply(cloud, path, binary: bool = True) -> None:
    try:
        atomic_write(path, format_ply(cloud, binary))
    except OSError as exc:
        raise PointFileError(f"{path}: cannot write ({exc.strerror or exc})") from exc


def read_points(path) -> np.ndarray:
    """Read a cloud, choosing the format from the file extension."""
    return read_ply(path) if Path(path).suffix.lower() == ".ply" else read_xyz(path)


def write_points(cloud, path) -> None:
    if Path(path).suffix.lower() == ".ply":
        write_ply(cloud, path)
    else:
        write_xyz(cloud, path)


def write_text(text: str, path) -> None:
    """Write text atomically, or to stdout when ``path`` is ``None`` or ``-``."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        atomic_write(path, text.encode("utf-8"))
    except OSError as exc:
        raise PointFileError(f"{path}: cannot write ({exc.strerror or exc})") from exc
