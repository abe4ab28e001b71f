"""OSNL checkpoint files: one field snapshot plus its time, little-endian.

Layout: magic "OSNL", format version u32 = 1, nx u32, ny u32, lx f64, ly f64, time f64,
then nx·ny interleaved (re f64, im f64) pairs in row-major (y-major, x fastest) order.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import List, Tuple

import numpy as np

from osnls.errors import CheckpointFormatError, InvalidParamsError
from osnls.grid import ComplexField, GridSpec

MAGIC = b"OSNL"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sIIIddd")


def write_checkpoint(path: Path, field: ComplexField, time: float) -> Path:
    """Write one snapshot; overwrites an existing file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    g = field.grid
    header = HEADER.pack(MAGIC, FORMAT_VERSION, g.nx, g.ny, float(g.lx), float(g.ly), float(time))
    payload = np.ascontiguousarray(field.values, dtype="<c16").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
    return path


def read_checkpoint(path: Path) -> Tuple[ComplexField, float]:
    """Return (field, time). Raises CheckpointFormatError on a malformed file."""
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise CheckpointFormatError(f"{path}: file too short for an OSNL header ({len(data)} bytes)")
    magic, version, nx, ny, lx, ly, time = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointFormatError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CheckpointFormatError(f"{path}: unsupported format version {version}")
    expected = HEADER.size + nx * ny * 16
    if len(data) != expected:
        raise CheckpointFormatError(
            f"{path}: expected {expected} bytes for a {nx}x{ny} field, got {len(data)}"
        )
    values = np.frombuffer(data, dtype="<c16", offset=HEADER.size).reshape(ny, nx)
    try:
        grid = GridSpec(int(nx), int(ny), lx, ly)
    except InvalidParamsError as e:
        raise CheckpointFormatError(f"{path}: {e}") from e
    blown_up = not bool(np.all(np.isfinite(values)))
    return ComplexField(grid, values.astype(np.complex128), blown_up=blown_up), time


def write_frames(directory: Path, frames: List[Tuple[float, ComplexField]], prefix: str = "frame") -> List[Path]:
    """Write frame_00000.osnl, frame_00001.osnl, ... in frame order."""
    directory = Path(directory)
    return [
        write_checkpoint(directory / f"{prefix}_{i:05d}.osnl", field, t)
        for i, (t, field) in enumerate(frames)
    ]
