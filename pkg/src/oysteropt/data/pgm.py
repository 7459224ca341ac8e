"""Netpbm greyscale (PGM) reading and writing, ASCII (P2) and binary (P5)."""

from __future__ import annotations

import re

import numpy as np

__all__ = ["PGMFormatError", "read_pgm", "write_pgm", "load_pgm", "save_pgm"]

_WHITESPACE = b" \t\n\r\x0b\x0c"


class PGMFormatError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self):
        d = self.data
        while self.pos < len(d):
            c = d[self.pos:self.pos + 1]
            if c == b"#":
                while self.pos < len(d) and d[self.pos:self.pos + 1] not in (b"\n", b"\r"):
                    self.pos += 1
            elif c in _WHITESPACE:
                self.pos += 1
            else:
                break

    def token(self, what: str) -> bytes:
        self.skip_space()
        start = self.pos
        d = self.data
        while self.pos < len(d) and d[self.pos:self.pos + 1] not in _WHITESPACE and d[self.pos:self.pos + 1] != b"#":
            self.pos += 1
        if self.pos == start:
            raise PGMFormatError(f"truncated stream: expected {what}", start)
        return d[start:self.pos]

    def integer(self, what: str) -> int:
        tok = self.token(what)
        start = self.pos - len(tok)
        self.last = start
        if not tok.isdigit():
            raise PGMFormatError(f"expected {what}, found {tok[:16]!r}", start)
        return int(tok)


def read_pgm(data: bytes) -> np.ndarray:
    """Decode a P2 or P5 stream into a float array in [0, 1], shape (height, width)."""
    if isinstance(data, str):
        data = data.encode("ascii")
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PGMFormatError(f"bad magic number {magic!r}, expected b'P2' or b'P5'", 0)
    r = _Reader(data)
    r.pos = 2
    width = r.integer("width")
    extents_at = r.last
    height = r.integer("height")
    if width < 1 or height < 1:
        raise PGMFormatError(f"image extents must be positive, got {width}x{height}", extents_at)
    maxval = r.integer("maxval")
    at = r.last
    if not 0 < maxval < 65536:
        raise PGMFormatError(f"maxval must be in 1..65535, got {maxval}", at)
    n = width * height

    if magic == b"P5":
        if r.pos >= len(data) or data[r.pos:r.pos + 1] not in _WHITESPACE:
            raise PGMFormatError("missing whitespace after maxval", r.pos)
        start = r.pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = n * dtype.itemsize
        if len(data) - start < need:
            raise PGMFormatError(f"truncated payload: need {need} bytes, have {len(data) - start}", len(data))
        values = np.frombuffer(data, dtype=dtype, count=n, offset=start).astype(np.int64)
    else:
        body = data[r.pos:]
        if b"#" in body:
            body = re.sub(rb"#[^\n\r]*", b"", body)
        tokens = body.split()
        if len(tokens) < n:
            raise PGMFormatError(f"truncated payload: need {n} samples, have {len(tokens)}", len(data))
        tokens = tokens[:n]
        bad = next((t for t in tokens if not t.isdigit()), None)
        if bad is not None:
            raise PGMFormatError(f"non-numeric sample {bad[:16]!r}", r.pos + data[r.pos:].find(bad))
        values = np.array(tokens).astype(np.int64)

    if values.max(initial=0) > maxval:
        raise PGMFormatError(f"pixel value exceeds maxval {maxval}", at)
    return (values.astype(np.float64) / maxval).reshape(height, width)


def write_pgm(image, binary: bool = True, maxval: int = 255) -> bytes:
    """Encode a 2-D array of values in [0, 1] as P5 (default) or P2."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2 or min(img.shape) < 1:
        raise ValueError(f"image must be a nonempty 2-D array, got shape {img.shape}")
    if not 0 < maxval < 65536:
        raise ValueError(f"maxval must be in 1..65535, got {maxval}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    h, w = img.shape
    q = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(np.int64)
    if binary:
        header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
        dtype = ">u2" if maxval > 255 else "u1"
        return header + q.astype(dtype).tobytes()
    lines = [f"P2\n{w} {h}\n{maxval}\n"]
    lines.extend(" ".join(map(str, row)) + "\n" for row in q)
    return "".join(lines).encode("ascii")


def load_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        return read_pgm(f.read())


def save_pgm(path, image, binary: bool = True, maxval: int = 255) -> None:
    with open(path, "wb") as f:
        f.write(write_pgm(image, binary=binary, maxval=maxval))
