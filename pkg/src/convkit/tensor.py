"""Dense 4-D tensors in NCHW layout with a small binary file format.

All tensors hold 32-bit floats in row-major (C-contiguous) order, images
outermost and the X coordinate fastest.  Zero padding around the spatial
plane is never materialised: :func:`read_padded` answers 0.0 for
out-of-plane coordinates instead.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidShape

MAGIC = b"C0NV"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIIII")  # magic, version, n, c, h, w


class Tensor4:
    """A float32 tensor of shape (n, c, h, w), always C-contiguous.

    Parameters
    ----------
    data : np.ndarray
        4-D array; copied/converted to contiguous float32 if needed.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data)
        if arr.ndim != 4:
            raise InvalidShape(f"expected 4 dims, got {arr.ndim}")
        if any(d <= 0 for d in arr.shape):
            raise InvalidShape(f"dims must be positive, got {arr.shape}")
        self.data = np.ascontiguousarray(arr, dtype=np.float32)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return self.data.shape

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def c(self) -> int:
        return self.data.shape[1]

    @property
    def h(self) -> int:
        return self.data.shape[2]

    @property
    def w(self) -> int:
        return self.data.shape[3]

    def flat_index(self, n: int, c: int, y: int, x: int) -> int:
        """Offset of element (n, c, y, x) in the flat buffer."""
        return ((n * self.c + c) * self.h + y) * self.w + x

    def coords(self, flat: int) -> tuple[int, int, int, int]:
        """Inverse of :meth:`flat_index`."""
        x = flat % self.w
        flat //= self.w
        y = flat % self.h
        flat //= self.h
        c = flat % self.c
        n = flat // self.c
        return n, c, y, x

    def __repr__(self) -> str:
        return f"Tensor4(dims={self.dims})"


def make_tensor(dims, fill="zeros", *, value=0.0, seed=None, lo=-1.0, hi=1.0) -> Tensor4:
    """Create an (n, c, h, w) tensor with the given fill.

    fill is one of:

    - ``"zeros"``    -- all elements 0.0
    - ``"constant"`` -- all elements ``value``
    - ``"uniform"``  -- i.i.d. uniform floats in [lo, hi), drawn from a
      PCG64 generator seeded with ``seed``.  The stream is fully determined
      by the seed and does not depend on the platform.
    """
    if len(dims) != 4:
        raise InvalidShape(f"expected 4 dims, got {len(dims)}")
    if any(int(d) <= 0 for d in dims):
        raise InvalidShape(f"dims must be positive, got {tuple(dims)}")
    shape = tuple(int(d) for d in dims)

    if fill == "zeros":
        return Tensor4(np.zeros(shape, dtype=np.float32))
    if fill == "constant":
        return Tensor4(np.full(shape, np.float32(value), dtype=np.float32))
    if fill == "uniform":
        if seed is None:
            raise InvalidShape("uniform fill requires a seed")
        if not lo < hi:
            raise InvalidShape(f"uniform fill requires lo < hi, got [{lo}, {hi})")
        rng = np.random.Generator(np.random.PCG64(seed))
        vals = rng.uniform(lo, hi, size=shape).astype(np.float32)
        return Tensor4(vals)
    raise InvalidShape(f"unknown fill {fill!r}")


def read_padded(t: Tensor4, n: int, c: int, y: int, x: int) -> np.float32:
    """Element (n, c, y, x), treating out-of-plane y/x as zero padding.

    n and c must be in range; only the spatial coordinates are virtual.
    """
    if not 0 <= n < t.n:
        raise IndexError(f"image index {n} out of range [0, {t.n})")
    if not 0 <= c < t.c:
        raise IndexError(f"channel index {c} out of range [0, {t.c})")
    if 0 <= y < t.h and 0 <= x < t.w:
        return t.data[n, c, y, x]
    return np.float32(0.0)


# ---------------------------------------------------------------------------
# binary file format: magic "C0NV", u16 version, four u32 dims, f32 payload,
# everything little-endian, payload in flat NCHW order.
# ---------------------------------------------------------------------------

def save_tensor(t: Tensor4, path) -> None:
    """Write ``t`` to ``path`` in the convkit binary format."""
    n, c, h, w = t.dims
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, n, c, h, w)
    payload = np.ascontiguousarray(t.data, dtype="<f4").tobytes()
    Path(path).write_bytes(header + payload)


def load_tensor(path) -> Tensor4:
    """Read a tensor written by :func:`save_tensor`.

    Raises FormatError on bad magic, unsupported version, non-positive
    dims, or a payload whose size disagrees with the header.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"file too short for header ({len(raw)} bytes)")
    magic, version, n, c, h, w = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported version {version}")
    if min(n, c, h, w) <= 0:
        raise FormatError(f"non-positive dims ({n}, {c}, {h}, {w})")
    count = n * c * h * w
    expected = _HEADER.size + 4 * count
    if len(raw) != expected:
        raise FormatError(
            f"payload size mismatch: header declares {count} elements "
            f"({expected} bytes total), file has {len(raw)} bytes"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(n, c, h, w)
    # frombuffer yields a read-only view; tensors own writable storage
    return Tensor4(data.copy())
