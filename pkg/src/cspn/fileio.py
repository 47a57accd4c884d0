"""File formats: PFM depth maps, PGM/PPM images, CSV depth and sparse samples.

PFM is the primary depth format (32-bit little-endian floats, lossless at
the file level); CSV depth uses %.17g so float64 values round-trip through
text. All writers go through a temp-file-and-rename so readers never see a
partial file.
"""

from __future__ import annotations

import os
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np

from .core import DepthMap, Image, SparseDepthMap


class ParseError(Exception):
    """A file exists but does not conform to its format."""


def write_bytes_atomic(path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _next_token(buf: bytes, pos: int, allow_comments: bool = False) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif allow_comments and c == b"#":
            while pos < n and buf[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ParseError("truncated header")
    return buf[start:pos], pos


# ---------------------------------------------------------------------------
# PFM (grayscale float maps)
# ---------------------------------------------------------------------------

def write_pfm(path, values: np.ndarray) -> None:
    """Grayscale PFM, little-endian, rows stored bottom-up per convention."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ParseError(f"PFM writer expects a 2D array, got shape {arr.shape}")
    h, w = arr.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    write_bytes_atomic(path, header + np.flipud(arr).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    try:
        magic, pos = _next_token(buf, 0)
        if magic == b"PF":
            raise ParseError("color PFM is not supported; expected grayscale 'Pf'")
        if magic != b"Pf":
            raise ParseError(f"not a PFM file (magic {magic!r})")
        wtok, pos = _next_token(buf, pos)
        htok, pos = _next_token(buf, pos)
        stok, pos = _next_token(buf, pos)
        w, h = int(wtok), int(htok)
        scale = float(stok)
    except ValueError as e:
        raise ParseError(f"malformed PFM header: {e}") from None
    if w < 1 or h < 1:
        raise ParseError(f"bad PFM dimensions {w}x{h}")
    data = buf[pos + 1 :]  # single whitespace byte separates header from data
    if len(data) < 4 * w * h:
        raise ParseError(f"PFM data truncated: expected {4 * w * h} bytes, got {len(data)}")
    dtype = "<f4" if scale < 0 else ">f4"
    plane = np.frombuffer(data[: 4 * w * h], dtype=dtype).reshape((h, w))
    return np.flipud(plane).astype(np.float64)


# ---------------------------------------------------------------------------
# PGM / PPM (maxval-scaled images mapped to [0, 1])
# ---------------------------------------------------------------------------

def write_image(path, image: Image) -> None:
    levels = np.rint(np.clip(image.values, 0.0, 1.0) * 255.0).astype(np.uint8)
    if image.channels == 1:
        header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    else:
        header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    write_bytes_atomic(path, header + levels.tobytes())


def read_image(path) -> Image:
    buf = Path(path).read_bytes()
    try:
        magic, pos = _next_token(buf, 0, allow_comments=True)
        if magic not in (b"P5", b"P6"):
            raise ParseError(f"unsupported image magic {magic!r}; expected binary PGM/PPM")
        wtok, pos = _next_token(buf, pos, allow_comments=True)
        htok, pos = _next_token(buf, pos, allow_comments=True)
        mtok, pos = _next_token(buf, pos, allow_comments=True)
        w, h, maxval = int(wtok), int(htok), int(mtok)
    except ValueError as e:
        raise ParseError(f"malformed PGM/PPM header: {e}") from None
    if w < 1 or h < 1:
        raise ParseError(f"bad image dimensions {w}x{h}")
    if not 1 <= maxval <= 255:
        raise ParseError(f"unsupported maxval {maxval}; expected 1..255")
    channels = 1 if magic == b"P5" else 3
    need = w * h * channels
    data = buf[pos + 1 :]
    if len(data) < need:
        raise ParseError(f"image data truncated: expected {need} bytes, got {len(data)}")
    raw = np.frombuffer(data[:need], dtype=np.uint8)
    shape = (h, w) if channels == 1 else (h, w, 3)
    return Image(raw.reshape(shape).astype(np.float64) / float(maxval))


# ---------------------------------------------------------------------------
# Depth maps (PFM or CSV by extension) and sparse-sample CSV
# ---------------------------------------------------------------------------

def write_depth(path, depth: DepthMap) -> None:
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        write_pfm(path, depth.values)
    elif suffix == ".csv":
        out = StringIO()
        np.savetxt(out, depth.values, fmt="%.17g", delimiter=",")
        write_bytes_atomic(path, out.getvalue().encode("ascii"))
    else:
        raise ParseError(f"unsupported depth format {suffix!r}; use .pfm or .csv")


def read_depth(path) -> DepthMap:
    suffix = Path(path).suffix.lower()
    if suffix == ".pfm":
        return DepthMap(read_pfm(path))
    if suffix == ".csv":
        try:
            values = np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError as e:
            raise ParseError(f"malformed CSV depth map: {e}") from None
        return DepthMap(values)
    raise ParseError(f"unsupported depth format {suffix!r}; use .pfm or .csv")


def write_sparse_csv(path, sparse: SparseDepthMap) -> None:
    lines = [
        f"{r},{c},{d!r}"
        for r, c, d in zip(sparse.rows.tolist(), sparse.cols.tolist(), sparse.depths.tolist())
    ]
    write_bytes_atomic(path, ("\n".join(lines) + ("\n" if lines else "")).encode("ascii"))


def read_sparse_csv(path, height: int, width: int) -> SparseDepthMap:
    entries = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ParseError(f"sparse CSV line {lineno}: expected 'row,col,depth', got {line!r}")
        try:
            entries.append((int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as e:
            raise ParseError(f"sparse CSV line {lineno}: {e}") from None
    return SparseDepthMap.from_entries(height, width, entries)
