"""Little-endian binary encoding shared by the index and topic-model files.

Layout conventions: fixed-width little-endian integers, IEEE-754 doubles,
length-prefixed UTF-8 strings, and a trailing CRC-32 over everything that
precedes it.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import PersistenceError


class Writer:
    def __init__(self, magic: bytes, version: int):
        self._buf = bytearray(magic)
        self.u32(version)

    def u8(self, value: int) -> None:
        self._buf += struct.pack("<B", value)

    def u32(self, value: int) -> None:
        self._buf += struct.pack("<I", value)

    def i64(self, value: int) -> None:
        self._buf += struct.pack("<q", value)

    def f64(self, value: float) -> None:
        self._buf += struct.pack("<d", value)

    def string(self, value: str) -> None:
        raw = value.encode("utf-8")
        self.u32(len(raw))
        self._buf += raw

    def f64_array(self, values: np.ndarray) -> None:
        self._buf += np.ascontiguousarray(values, dtype="<f8").tobytes()

    def finish(self, path: str | Path) -> None:
        checksum = zlib.crc32(bytes(self._buf))
        Path(path).write_bytes(bytes(self._buf) + struct.pack("<I", checksum))


class Reader:
    def __init__(self, path: str | Path, magic: bytes, version: int):
        p = Path(path)
        if not p.is_file():
            raise PersistenceError(f"artifact file not found: {p}")
        data = p.read_bytes()
        if len(data) < len(magic) + 8 or data[: len(magic)] != magic:
            raise PersistenceError(f"{p}: not a {magic.decode()} file (bad magic bytes)")
        stored = struct.unpack("<I", data[-4:])[0]
        if zlib.crc32(data[:-4]) != stored:
            raise PersistenceError(f"{p}: checksum mismatch (file corrupt or truncated)")
        self._data = data[:-4]
        self._pos = len(magic)
        self._path = p
        got = self.u32()
        if got != version:
            raise PersistenceError(f"{p}: unsupported format version {got} (expected {version})")

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise PersistenceError(f"{self._path}: truncated record section")
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def u8(self) -> int:
        return struct.unpack("<B", self._take(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self._take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8))[0]

    def string(self) -> str:
        return self._take(self.u32()).decode("utf-8")

    def f64_array(self, count: int) -> np.ndarray:
        return np.frombuffer(self._take(count * 8), dtype="<f8").astype(np.float64)

    def done(self) -> None:
        if self._pos != len(self._data):
            raise PersistenceError(f"{self._path}: {len(self._data) - self._pos} trailing bytes")
