"""Point cloud file I/O: xyz-csv, PLY ascii and PLY binary (little-endian).

CSV columns are ``x,y,z[,label]`` with an optional header row.  PLY files
carry a ``vertex`` element with float64 ``x y z`` and an optional uint8
``label`` scalar.
"""

from __future__ import annotations

import io as _io
from pathlib import Path

import numpy as np

from .cloud import PointCloud

FORMATS = ("xyz-csv", "ply-ascii", "ply-binary")


class PointCloudParseError(ValueError):
    """Malformed point-cloud file; message carries path and location."""


def load_pointcloud(path: str | Path, format: str | None = None) -> PointCloud:
    """Load a cloud; ``format`` defaults from the file extension."""
    path = Path(path)
    fmt = format or _guess_format(path)
    if fmt == "xyz-csv":
        return _load_csv(path)
    if fmt in ("ply-ascii", "ply-binary"):
        return _load_ply(path)
    raise ValueError(f"unknown point cloud format {fmt!r}")


def save_pointcloud(cloud: PointCloud, path: str | Path, format: str | None = None) -> None:
    path = Path(path)
    fmt = format or _guess_format(path)
    try:
        if fmt == "xyz-csv":
            _save_csv(cloud, path)
        elif fmt == "ply-ascii":
            _save_ply(cloud, path, binary=False)
        elif fmt == "ply-binary":
            _save_ply(cloud, path, binary=True)
        else:
            raise ValueError(f"unknown point cloud format {fmt!r}")
    except OSError as exc:
        raise OSError(f"writing point cloud to {path}: {exc}") from exc


def _guess_format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix in (".csv", ".xyz", ".txt"):
        return "xyz-csv"
    if suffix == ".ply":
        # Sniff the header; default to binary for writes.
        if path.exists():
            with open(path, "rb") as fh:
                header = fh.read(256)
            return "ply-ascii" if b"format ascii" in header else "ply-binary"
        return "ply-binary"
    raise ValueError(f"cannot infer point cloud format from {path.name!r}")


# -- csv ------------------------------------------------------------------

def _load_csv(path: Path) -> PointCloud:
    rows: list[list[float]] = []
    ncols = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if lineno == 1 and any(_is_not_number(p) for p in parts):
                continue  # header row
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise PointCloudParseError(
                    f"{path}:{lineno}: unparseable record {line!r}"
                ) from None
            if len(values) not in (3, 4):
                raise PointCloudParseError(
                    f"{path}:{lineno}: expected 3 or 4 columns, got {len(values)}"
                )
            if ncols is None:
                ncols = len(values)
            elif len(values) != ncols:
                raise PointCloudParseError(
                    f"{path}:{lineno}: inconsistent column count "
                    f"({len(values)} vs {ncols})"
                )
            if not all(np.isfinite(values[:3])):
                raise PointCloudParseError(
                    f"{path}:{lineno}: non-finite coordinate in {line!r}"
                )
            rows.append(values)
    if not rows:
        return PointCloud.empty()
    data = np.asarray(rows, dtype=np.float64)
    labels = data[:, 3].astype(np.uint8) if data.shape[1] == 4 else None
    return PointCloud(data[:, :3], labels)


def _is_not_number(token: str) -> bool:
    try:
        float(token)
        return False
    except ValueError:
        return True


def _save_csv(cloud: PointCloud, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if cloud.has_labels:
            fh.write("x,y,z,label\n")
            for (x, y, z), lab in zip(cloud.xyz, cloud.labels):
                fh.write(f"{x!r},{y!r},{z!r},{lab}\n")
        else:
            fh.write("x,y,z\n")
            for x, y, z in cloud.xyz:
                fh.write(f"{x!r},{y!r},{z!r}\n")


# -- ply ------------------------------------------------------------------

_PLY_TYPES = {
    "float": ("<f4", 4), "float32": ("<f4", 4),
    "double": ("<f8", 8), "float64": ("<f8", 8),
    "uchar": ("<u1", 1), "uint8": ("<u1", 1),
    "char": ("<i1", 1), "int8": ("<i1", 1),
    "short": ("<i2", 2), "ushort": ("<u2", 2),
    "int": ("<i4", 4), "int32": ("<i4", 4),
    "uint": ("<u4", 4), "uint32": ("<u4", 4),
}


def _load_ply(path: Path) -> PointCloud:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        header_end = data.index(b"end_header\n") + len(b"end_header\n")
    except ValueError:
        raise PointCloudParseError(f"{path}: missing PLY end_header") from None
    header_lines = data[:header_end].decode("ascii", errors="replace").splitlines()
    if not header_lines or header_lines[0].strip() != "ply":
        raise PointCloudParseError(f"{path}: not a PLY file")

    fmt = None
    vertex_count = None
    props: list[tuple[str, str]] = []
    in_vertex = False
    for line in header_lines[1:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            in_vertex = parts[1] == "vertex"
            if in_vertex:
                vertex_count = int(parts[2])
        elif parts[0] == "property" and in_vertex:
            props.append((parts[1], parts[2]))
    if fmt not in ("ascii", "binary_little_endian"):
        raise PointCloudParseError(f"{path}: unsupported PLY format {fmt!r}")
    if vertex_count is None:
        raise PointCloudParseError(f"{path}: no vertex element")
    names = [name for _, name in props]
    for c in ("x", "y", "z"):
        if c not in names:
            raise PointCloudParseError(f"{path}: vertex element lacks property {c!r}")

    if fmt == "ascii":
        body = data[header_end:].decode("ascii", errors="replace")
        table = np.loadtxt(_io.StringIO(body), ndmin=2) if body.strip() else np.zeros((0, len(props)))
        if table.shape[0] != vertex_count or (vertex_count and table.shape[1] != len(props)):
            raise PointCloudParseError(
                f"{path}: body shape {table.shape} does not match header "
                f"({vertex_count} vertices, {len(props)} properties)"
            )
        columns = {name: table[:, i] for i, (_, name) in enumerate(props)}
    else:
        dtype = np.dtype([(name, _PLY_TYPES[typ][0]) for typ, name in props])
        expected = vertex_count * dtype.itemsize
        body = data[header_end:]
        if len(body) < expected:
            raise PointCloudParseError(
                f"{path}: binary body truncated at byte {header_end + len(body)} "
                f"(expected {expected} payload bytes)"
            )
        records = np.frombuffer(body[:expected], dtype=dtype)
        columns = {name: records[name] for _, name in props}

    xyz = np.column_stack([columns["x"], columns["y"], columns["z"]]).astype(np.float64)
    if not np.all(np.isfinite(xyz)):
        raise PointCloudParseError(f"{path}: non-finite coordinate in vertex data")
    labels = columns["label"].astype(np.uint8) if "label" in columns else None
    return PointCloud(xyz, labels)


def _save_ply(cloud: PointCloud, path: Path, binary: bool) -> None:
    n = len(cloud)
    lines = [
        "ply",
        "format binary_little_endian 1.0" if binary else "format ascii 1.0",
        f"element vertex {n}",
        "property double x",
        "property double y",
        "property double z",
    ]
    if cloud.has_labels:
        lines.append("property uchar label")
    lines.append("end_header")
    header = ("\n".join(lines) + "\n").encode("ascii")

    with open(path, "wb") as fh:
        fh.write(header)
        if binary:
            if cloud.has_labels:
                dtype = np.dtype([("x", "<f8"), ("y", "<f8"), ("z", "<f8"), ("label", "<u1")])
                rec = np.empty(n, dtype=dtype)
                rec["x"], rec["y"], rec["z"] = cloud.xyz.T
                rec["label"] = cloud.labels
            else:
                dtype = np.dtype([("x", "<f8"), ("y", "<f8"), ("z", "<f8")])
                rec = np.empty(n, dtype=dtype)
                rec["x"], rec["y"], rec["z"] = cloud.xyz.T
            fh.write(rec.tobytes())
        else:
            out = []
            if cloud.has_labels:
                for (x, y, z), lab in zip(cloud.xyz, cloud.labels):
                    out.append(f"{x!r} {y!r} {z!r} {lab}\n")
            else:
                for x, y, z in cloud.xyz:
                    out.append(f"{x!r} {y!r} {z!r}\n")
            fh.write("".join(out).encode("ascii"))
