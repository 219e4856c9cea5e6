"""File I/O: complex k-space volumes, PGM, and PNG grayscale images.

k-space files ("FCSK") are a 16-byte header — magic ``FCSK``, u32 N, u32
channel count, 4 reserved zero bytes, all little-endian — followed by the
channels in order, each an N x N row-major grid of complex values stored
as interleaved little-endian float64 (re, im).  The format exists for
bit-exact interchange, so reads and writes round-trip exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image, PngImagePlugin

__all__ = [
    "write_fcsk",
    "read_fcsk",
    "write_pgm",
    "read_pgm",
    "write_png",
    "read_image",
    "to_uint8",
]

_FCSK_MAGIC = b"FCSK"


def write_fcsk(path: str | Path, kspace: np.ndarray) -> None:
    """Write complex k-space, shape (channels, N, N) or (N, N)."""
    arr = np.asarray(kspace, dtype=np.complex128)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"expected (channels, N, N), got {arr.shape}")
    channels, n = arr.shape[0], arr.shape[1]
    with open(path, "wb") as fh:
        fh.write(_FCSK_MAGIC + struct.pack("<II4x", n, channels))
        fh.write(np.ascontiguousarray(arr.astype("<c16")).tobytes())


def read_fcsk(path: str | Path) -> np.ndarray:
    """Read an FCSK file back to a (channels, N, N) complex array."""
    raw = Path(path).read_bytes()
    if raw[:4] != _FCSK_MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:4]!r}")
    n, channels = struct.unpack_from("<II", raw, 4)
    expect = 16 + channels * n * n * 16
    if len(raw) != expect:
        raise ValueError(f"{path}: expected {expect} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<c16", offset=16)
    return data.reshape(channels, n, n).astype(np.complex128)


def write_pgm(path: str | Path, image: np.ndarray, maxval: int = 255) -> None:
    """Binary PGM (P5); 16-bit samples are written big-endian per Netpbm."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ValueError("PGM images are 2D")
    if not 0 < maxval < 65536:
        raise ValueError("maxval must be in [1, 65535]")
    clipped = np.clip(np.rint(arr), 0, maxval)
    payload = clipped.astype(">u2" if maxval > 255 else np.uint8).tobytes()
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii"))
        fh.write(payload)


def _pgm_tokens(raw: bytes):
    # header tokens, skipping '#' comments; stops after maxval
    i = 0
    while True:
        while i < len(raw) and raw[i : i + 1].isspace():
            i += 1
        if raw[i : i + 1] == b"#":
            while i < len(raw) and raw[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(raw) and not raw[j : j + 1].isspace():
            j += 1
        yield raw[i:j], j
        i = j


def read_pgm(path: str | Path) -> np.ndarray:
    """Read binary PGM to float64, raw sample values preserved."""
    raw = Path(path).read_bytes()
    tokens = _pgm_tokens(raw)
    magic, _ = next(tokens)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    (wtok, _), (htok, _), (mvtok, end) = next(tokens), next(tokens), next(tokens)
    w, h, maxval = int(wtok), int(htok), int(mvtok)
    data = raw[end + 1 :]  # single whitespace byte after maxval
    dtype = ">u2" if maxval > 255 else np.uint8
    img = np.frombuffer(data, dtype=dtype, count=w * h).reshape(h, w)
    return img.astype(np.float64)


def write_png(path: str | Path, image: np.ndarray) -> None:
    """8-bit grayscale PNG with a pinned encoder configuration, so equal
    arrays produce byte-identical files."""
    arr = np.clip(np.rint(np.asarray(image)), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(
        path, format="PNG", optimize=False, compress_level=6,
        pnginfo=PngImagePlugin.PngInfo(),
    )


def read_image(path: str | Path) -> np.ndarray:
    """Load a grayscale PGM or PNG as float64 raw sample values."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    with Image.open(path) as im:
        if im.mode not in ("L", "I;16", "I;16B", "I"):
            im = im.convert("L")
        return np.asarray(im, dtype=np.float64)


def to_uint8(image: np.ndarray) -> np.ndarray:
    arr = np.asarray(image, dtype=np.float64)
    return np.clip(np.rint(arr), 0, 255).astype(np.uint8)
