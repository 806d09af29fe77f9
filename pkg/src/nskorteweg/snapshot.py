"""Binary snapshot format.

Layout (little endian)::

    b"NSKS"  uint32 version  uint32 n  uint32 N[n]  float64 L  float64 t
    32-byte params digest
    complex128 pi_hat (row-major), then complex128 m_hat[i] for i < n
"""
from __future__ import annotations

import os
import struct

import numpy as np

from .errors import FormatError
from .field import Grid, SpectralState

__all__ = ["MAGIC", "VERSION", "write_snapshot", "read_snapshot", "Snapshot"]

MAGIC = b"NSKS"
VERSION = 1
_DT = np.dtype("<c16")


class Snapshot:
    __slots__ = ("state", "digest", "version")

    def __init__(self, state: SpectralState, digest: bytes, version: int = VERSION):
        self.state = state
        self.digest = digest
        self.version = version


def encode(state: SpectralState, digest: bytes) -> bytes:
    if len(digest) != 32:
        raise FormatError(f"params digest must be 32 bytes, got {len(digest)}")
    g = state.grid
    head = MAGIC + struct.pack("<II", VERSION, g.n) + struct.pack(f"<{g.n}I", *g.shape)
    head += struct.pack("<dd", g.L, state.t) + digest
    body = state.pi_hat.astype(_DT).tobytes(order="C") + state.m_hat.astype(_DT).tobytes(order="C")
    return head + body


def decode(blob: bytes, expected_digest: bytes | None = None) -> Snapshot:
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise FormatError("bad magic: not a snapshot file")
    version, n = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise FormatError(f"unsupported snapshot version {version} (expected {VERSION})")
    if n not in (1, 2, 3):
        raise FormatError(f"bad dimension {n} in header")
    off = 12
    need = off + 4 * n + 16 + 32
    if len(blob) < need:
        raise FormatError("truncated header")
    shape = struct.unpack_from(f"<{n}I", blob, off)
    off += 4 * n
    if len(set(shape)) != 1:
        raise FormatError(f"non-cubic grid {shape}")
    L, t = struct.unpack_from("<dd", blob, off)
    off += 16
    digest = bytes(blob[off:off + 32])
    off += 32
    count = int(np.prod(shape))
    size = (n + 1) * count * _DT.itemsize
    if len(blob) != off + size:
        raise FormatError(f"truncated or oversized body: {len(blob) - off} bytes, expected {size}")
    if expected_digest is not None and digest != expected_digest:
        raise FormatError(
            f"params digest mismatch: file {digest.hex()[:16]}..., config {expected_digest.hex()[:16]}..."
        )
    data = np.frombuffer(blob, dtype=_DT, offset=off).astype(complex)
    try:
        grid = Grid(n, shape[0], L)
    except Exception as err:
        raise FormatError(f"invalid grid in header: {err}") from err
    pi = data[:count].reshape(shape)
    m = data[count:].reshape((n,) + shape)
    return Snapshot(SpectralState(grid, pi, m, t), digest, version)


def write_snapshot(path, state: SpectralState, digest: bytes) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(encode(state, digest))
    os.replace(tmp, path)


def read_snapshot(path, expected_digest: bytes | None = None) -> Snapshot:
    with open(path, "rb") as fh:
        return decode(fh.read(), expected_digest)
