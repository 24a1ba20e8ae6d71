"""Stride codecs: a zero-run lossless coder and an error-bounded predictive lossy coder.

Both operate on flat float64 arrays (one plane of a stride) and produce a
self-describing :class:`CompressedBlock`::

    magic "QCS1" | codec_id u8 | delta f64 | scalar_count u64 | payload_len u64 | payload

All integers little-endian.

Lossless payload: a sequence of varint tokens ``(length << 1) | kind``.  Kind 0
is a run of all-zero 8-byte words, kind 1 is a run of literal words whose raw
little-endian bytes follow the token.

Lossy payload: the predictor is the previously *reconstructed* scalar (0.0 for
the first).  Each scalar gets ``q = round((x - pred) / (2 delta))`` and is
reconstructed as ``pred + 2 delta q``.  Tokens are varints:

* odd ``v``: a run of ``v >> 1`` zero codes;
* even ``v`` with ``u = v >> 1 > 0``: a nonzero code, ``u = zigzag(q)``;
* ``v == 0``: escape, the raw scalar follows and is reconstructed exactly.

Escapes are used when ``|q| >= 2**15`` or when floating-point rounding would
push the reconstruction outside the bound.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numba
import numpy as np

MAGIC = b"QCS1"
HEADER = struct.Struct("<4sBdQQ")
HEADER_SIZE = HEADER.size  # 29

LOSSLESS = 0
LOSSY = 1

MAX_CODE = (1 << 15) - 1


class CodecError(ValueError):
    """Base class for codec failures."""


class BadMagicError(CodecError):
    pass


class TruncatedBlockError(CodecError):
    pass


class UnknownCodecError(CodecError):
    pass


class CorruptBlockError(CodecError):
    pass


@dataclass(frozen=True)
class CompressedBlock:
    codec_id: int
    delta: float
    scalar_count: int
    payload: bytes

    @property
    def nbytes(self) -> int:
        return HEADER_SIZE + len(self.payload)

    @property
    def ratio(self) -> float:
        """Uncompressed scalar bytes over total block bytes."""
        return 8.0 * self.scalar_count / self.nbytes

    def to_bytes(self) -> bytes:
        head = HEADER.pack(MAGIC, self.codec_id, self.delta, self.scalar_count, len(self.payload))
        return head + self.payload

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> tuple[CompressedBlock, int]:
        """Parse one block starting at ``offset``; returns the block and the offset past it."""
        if len(data) - offset < HEADER_SIZE:
            if data[offset:offset + 4] not in (MAGIC[: len(data) - offset], b""):
                raise BadMagicError("bad magic")
            raise TruncatedBlockError("truncated block header")
        magic, codec_id, delta, count, plen = HEADER.unpack_from(data, offset)
        if magic != MAGIC:
            raise BadMagicError(f"bad magic {magic!r}")
        if codec_id not in (LOSSLESS, LOSSY):
            raise UnknownCodecError(f"unknown codec id {codec_id}")
        start = offset + HEADER_SIZE
        if len(data) - start < plen:
            raise TruncatedBlockError(f"payload truncated: need {plen} bytes, have {len(data) - start}")
        return cls(codec_id, delta, count, bytes(data[start:start + plen])), start + plen


# --------------------------------------------------------------------------
# numba kernels


@numba.njit(cache=True, nogil=True)
def _put_varint(out, pos, value):
    while value > 0x7F:
        out[pos] = (value & 0x7F) | 0x80
        value >>= 7
        pos += 1
    out[pos] = value
    return pos + 1


@numba.njit(cache=True, nogil=True)
def _get_varint(buf, pos):
    # returns (value, new_pos); new_pos == -1 on truncation or overlong varint
    result = 0
    shift = 0
    n = buf.size
    while True:
        if pos >= n or shift > 63:
            return 0, -1
        b = buf[pos]
        pos += 1
        result |= (np.int64(b) & 0x7F) << shift
        if b < 0x80:
            return result, pos
        shift += 7


@numba.njit(cache=True, nogil=True)
def _put_word(out, pos, w):
    for k in range(8):
        out[pos + k] = (w >> np.uint64(8 * k)) & np.uint64(0xFF)
    return pos + 8


@numba.njit(cache=True, nogil=True)
def _get_word(buf, pos):
    w = np.uint64(0)
    for k in range(8):
        w |= np.uint64(buf[pos + k]) << np.uint64(8 * k)
    return w


@numba.njit(cache=True, nogil=True)
def _encode_zero_runs(words):
    n = words.size
    out = np.empty(9 * n + 32, dtype=np.uint8)
    pos = 0
    i = 0
    while i < n:
        j = i
        if words[i] == 0:
            while j < n and words[j] == 0:
                j += 1
            pos = _put_varint(out, pos, (j - i) << 1)
        else:
            while j < n and words[j] != 0:
                j += 1
            pos = _put_varint(out, pos, ((j - i) << 1) | 1)
            for k in range(i, j):
                pos = _put_word(out, pos, words[k])
        i = j
    return out[:pos]


@numba.njit(cache=True, nogil=True)
def _decode_zero_runs(buf, count, words):
    # returns 0 on success, -1 on malformed payload
    pos = 0
    i = 0
    while pos < buf.size:
        v, pos = _get_varint(buf, pos)
        if pos < 0:
            return -1
        length = v >> 1
        if length == 0 or i + length > count:
            return -1
        if v & 1:
            if pos + 8 * length > buf.size:
                return -1
            for k in range(length):
                words[i + k] = _get_word(buf, pos)
                pos += 8
        else:
            for k in range(length):
                words[i + k] = 0
        i += length
    return 0 if i == count else -1


@numba.njit(cache=True, nogil=True)
def _encode_predictive(xs, words, delta, recon):
    n = xs.size
    out = np.empty(9 * n + 32, dtype=np.uint8)
    pos = 0
    step = 2.0 * delta
    pred = 0.0
    run = 0
    limit = MAX_CODE + 0.5
    for i in range(n):
        x = xs[i]
        d = (x - pred) / step
        ok = False
        q = 0.0
        r = 0.0
        if abs(d) < limit:
            q = np.floor(d + 0.5)
            r = pred + step * q
            ok = abs(x - r) <= delta
        if ok and q == 0.0:
            run += 1
        else:
            if run > 0:
                pos = _put_varint(out, pos, (run << 1) | 1)
                run = 0
            if ok:
                qi = np.int64(q)
                zz = 2 * qi if qi > 0 else -2 * qi - 1
                pos = _put_varint(out, pos, zz << 1)
            else:
                out[pos] = 0
                pos = _put_word(out, pos + 1, words[i])
                r = x
        recon[i] = r
        pred = r
    if run > 0:
        pos = _put_varint(out, pos, (run << 1) | 1)
    return out[:pos]


@numba.njit(cache=True, nogil=True)
def _decode_predictive(buf, count, delta, xs, words):
    step = 2.0 * delta
    pred = 0.0
    pos = 0
    i = 0
    while pos < buf.size:
        v, pos = _get_varint(buf, pos)
        if pos < 0:
            return -1
        if v & 1:
            length = v >> 1
            if length == 0 or i + length > count:
                return -1
            for _ in range(length):
                r = pred + step * 0.0
                xs[i] = r
                pred = r
                i += 1
        else:
            if i >= count:
                return -1
            u = v >> 1
            if u == 0:
                if pos + 8 > buf.size:
                    return -1
                words[i] = _get_word(buf, pos)
                pos += 8
                pred = xs[i]
            else:
                q = (u >> 1) if (u & 1) == 0 else -((u + 1) >> 1)
                r = pred + step * np.float64(q)
                xs[i] = r
                pred = r
            i += 1
    return 0 if i == count else -1


# --------------------------------------------------------------------------
# public API


def _as_scalars(scalars) -> np.ndarray:
    x = np.ascontiguousarray(scalars, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError("scalars must be finite (no NaN/Inf)")
    return x


def compress_lossless(scalars) -> CompressedBlock:
    """Bit-exact zero-run compression of a float64 array."""
    x = _as_scalars(scalars)
    payload = _encode_zero_runs(x.view(np.uint64)).tobytes()
    return CompressedBlock(LOSSLESS, 0.0, x.size, payload)


def compress_lossy_with_recon(scalars, delta: float) -> tuple[CompressedBlock, np.ndarray]:
    """Lossy compression that also returns the values :func:`decompress` will produce."""
    if not delta > 0:
        raise ValueError(f"lossy error bound must be > 0, got {delta}")
    x = _as_scalars(scalars)
    recon = np.empty_like(x)
    payload = _encode_predictive(x, x.view(np.uint64), float(delta), recon).tobytes()
    return CompressedBlock(LOSSY, float(delta), x.size, payload), recon


def compress_lossy(scalars, delta: float) -> CompressedBlock:
    """Error-bounded compression: every decompressed scalar lies within ``delta`` of its input."""
    return compress_lossy_with_recon(scalars, delta)[0]


def compress(scalars, delta: float) -> CompressedBlock:
    """Dispatch on the error bound: ``delta == 0`` is lossless."""
    if delta == 0:
        return compress_lossless(scalars)
    return compress_lossy(scalars, delta)


def decompress(block: CompressedBlock | bytes) -> np.ndarray:
    if isinstance(block, (bytes, bytearray, memoryview)):
        block, end = CompressedBlock.from_bytes(bytes(block))
    if block.codec_id not in (LOSSLESS, LOSSY):
        raise UnknownCodecError(f"unknown codec id {block.codec_id}")
    buf = np.frombuffer(block.payload, dtype=np.uint8)
    out = np.empty(block.scalar_count, dtype=np.float64)
    if block.codec_id == LOSSLESS:
        status = _decode_zero_runs(buf, block.scalar_count, out.view(np.uint64))
    else:
        if not block.delta > 0:
            raise CorruptBlockError(f"lossy block with non-positive bound {block.delta}")
        status = _decode_predictive(buf, block.scalar_count, block.delta, out, out.view(np.uint64))
    if status != 0:
        raise CorruptBlockError("payload does not decode to the declared scalar count")
    return out
