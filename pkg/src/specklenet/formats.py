"""Binary file formats: SPKT tensors and 8-bit PGM images.

SPKT layout (little-endian throughout):
    magic ``SPKT`` | version byte 0x01 | dtype byte 0x01 (float32) |
    rank byte | rank x uint32 dims | row-major float32 payload.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

SPKT_MAGIC = b"SPKT"
SPKT_VERSION = 1
SPKT_DTYPE_F32 = 1


def write_spkt(path: str | Path, array: np.ndarray) -> None:
    """Write an array as an SPKT tensor (values stored as float32)."""
    arr = np.ascontiguousarray(array, dtype="<f4")
    if arr.ndim < 1 or arr.ndim > 255:
        raise FormatError(f"unsupported tensor rank {arr.ndim} for {path}")
    with open(path, "wb") as fh:
        fh.write(SPKT_MAGIC)
        fh.write(bytes([SPKT_VERSION, SPKT_DTYPE_F32, arr.ndim]))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.tobytes(order="C"))


def read_spkt(path: str | Path) -> np.ndarray:
    """Read an SPKT tensor; raises FormatError naming the file on any defect."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 7 or data[:4] != SPKT_MAGIC:
        raise FormatError(f"{path}: not an SPKT file (bad magic)")
    version, dtype, rank = data[4], data[5], data[6]
    if version != SPKT_VERSION:
        raise FormatError(f"{path}: unsupported SPKT version {version}")
    if dtype != SPKT_DTYPE_F32:
        raise FormatError(f"{path}: unsupported dtype byte {dtype}")
    header_end = 7 + 4 * rank
    if len(data) < header_end:
        raise FormatError(f"{path}: truncated dimension header")
    dims = struct.unpack(f"<{rank}I", data[7:header_end])
    count = int(np.prod(dims, dtype=np.int64)) if rank else 0
    payload = data[header_end:]
    if len(payload) != 4 * count:
        raise FormatError(
            f"{path}: payload holds {len(payload)} bytes, expected {4 * count}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    """Write a [0, 1] image as binary 8-bit PGM (P5)."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise FormatError(f"PGM expects a 2D image, got shape {img.shape} for {path}")
    quantized = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = quantized.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(quantized.tobytes())


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary 8-bit PGM into a [0, 1] float array (255 maps to 1.0)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise FormatError(f"{path}: not a binary PGM (P5) file")

    # header: magic, width, height, maxval as whitespace-separated tokens,
    # '#' comments allowed through end of line
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3 and pos < len(data):
        c = data[pos : pos + 1]
        if c == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        elif c.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            tokens.append(data[pos:end])
            pos = end
    if len(tokens) < 3:
        raise FormatError(f"{path}: truncated PGM header")
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if maxval != 255:
        raise FormatError(f"{path}: only 8-bit PGM supported, maxval={maxval}")
    pos += 1  # single whitespace byte after maxval
    payload = data[pos : pos + w * h]
    if len(payload) != w * h:
        raise FormatError(f"{path}: PGM payload truncated")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w).astype(np.float64) / 255.0
