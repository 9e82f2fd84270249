"""Reference convolution algorithms: direct, im2col+GEMM, and Winograd.

All algorithms consume NCHW Tensor4 inputs, an (m, c, hf, wf) filter bank,
and a ConvConfig, and produce an (n, m, h_out, w_out) Tensor4.

conv_naive fixes its floating-point summation order: for every output
element the per-filter-row dot products accumulate over channels in
ascending order, and the row results are then added in row-major filter
order, each chain starting from +0.0.  Algorithms that promise bitwise
agreement with conv_naive reproduce exactly that order.  conv_naive_f64
is the accuracy oracle; it accumulates in double precision (order
irrelevant at that width) and rounds once at the end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .configs import ConvConfig, filter_dims, input_dims, output_dims
from .errors import ShapeMismatch, Unsupported
from .tensor import Tensor4


def _require_operands(inp: Tensor4, filters: Tensor4, cfg: ConvConfig) -> None:
    if inp.dims != input_dims(cfg):
        raise ShapeMismatch(f"input dims {inp.dims} != config {input_dims(cfg)}")
    if filters.dims != filter_dims(cfg):
        raise ShapeMismatch(f"filter dims {filters.dims} != config {filter_dims(cfg)}")


def _shifted_window(arr: np.ndarray, h_out: int, w_out: int, dy: int, dx: int,
                    stride: int) -> np.ndarray:
    """Gather arr[..., y*stride+dy, x*stride+dx] over the output grid.

    Out-of-plane source coordinates contribute zeros, so the result is the
    virtually padded, strided window of the trailing two axes.
    """
    h, w = arr.shape[-2:]
    out = np.zeros(arr.shape[:-2] + (h_out, w_out), dtype=arr.dtype)
    y0 = max(0, (-dy + stride - 1) // stride)
    y1 = min(h_out, (h - 1 - dy) // stride + 1)
    x0 = max(0, (-dx + stride - 1) // stride)
    x1 = min(w_out, (w - 1 - dx) // stride + 1)
    if y1 > y0 and x1 > x0:
        ys = slice(y0 * stride + dy, (y1 - 1) * stride + dy + 1, stride)
        xs = slice(x0 * stride + dx, (x1 - 1) * stride + dx + 1, stride)
        out[..., y0:y1, x0:x1] = arr[..., ys, xs]
    return out


# ---------------------------------------------------------------------------
# direct convolution
# ---------------------------------------------------------------------------

def conv_naive(inp: Tensor4, filters: Tensor4, cfg: ConvConfig) -> Tensor4:
    """Direct convolution in float32 with a pinned summation order.

    Loops are vectorised over (n, m, y, x); the accumulation order per
    output element is exactly: one fresh accumulator per filter row summed
    over channels in ascending order, then the row results added in
    (yf, xf) row-major order.
    """
    _require_operands(inp, filters, cfg)
    h_out, w_out = output_dims(cfg)
    n, c = cfg.n, cfg.c
    m = cfg.m
    out = np.zeros((n, m, h_out, w_out), dtype=np.float32)
    row = np.empty_like(out)
    tmp = np.empty_like(out)
    for yf in range(cfg.hf):
        for xf in range(cfg.wf):
            shifted = _shifted_window(inp.data, h_out, w_out,
                                      yf - cfg.pad_h, xf - cfg.pad_w, cfg.stride)
            wrow = filters.data[:, :, yf, xf]  # (m, c)
            row.fill(0.0)
            for ch in range(c):
                np.multiply(shifted[:, ch, None], wrow[None, :, ch, None, None], out=tmp)
                np.add(row, tmp, out=row)
            np.add(out, row, out=out)
    return Tensor4(out)


def conv_naive_f64(inp: Tensor4, filters: Tensor4, cfg: ConvConfig) -> Tensor4:
    """Double-precision oracle: accumulate in float64, round once at the end.

    Implemented via materialised padding and a flattened window/filter
    matrix product, deliberately sharing no arithmetic path with the
    float32 algorithms it is used to check.
    """
    _require_operands(inp, filters, cfg)
    h_out, w_out = output_dims(cfg)
    padded = np.pad(inp.data.astype(np.float64),
                    ((0, 0), (0, 0), (cfg.pad_h, cfg.pad_h), (cfg.pad_w, cfg.pad_w)))
    win = sliding_window_view(padded, (cfg.hf, cfg.wf), axis=(2, 3))
    win = win[:, :, ::cfg.stride, ::cfg.stride]          # (n, c, ho, wo, hf, wf)
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(cfg.n * h_out * w_out, -1)
    filt = filters.data.astype(np.float64).reshape(cfg.m, -1)
    out64 = cols @ filt.T                                # (n*ho*wo, m)
    out64 = out64.reshape(cfg.n, h_out, w_out, cfg.m).transpose(0, 3, 1, 2)
    return Tensor4(out64.astype(np.float32))


# ---------------------------------------------------------------------------
# im2col + GEMM
# ---------------------------------------------------------------------------

@dataclass
class Im2colMatrix:
    """Unrolled receptive fields of one image.

    data[row, col] = input element at channel/offset row = (c*hf + yf)*wf + xf
    and output position col = y*w_out + x, with zero padding materialised.
    """

    data: np.ndarray
    c: int
    hf: int
    wf: int
    h_out: int
    w_out: int

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def row_index(self, c: int, yf: int, xf: int) -> int:
        return (c * self.hf + yf) * self.wf + xf

    def col_index(self, y: int, x: int) -> int:
        return y * self.w_out + x


def im2col(inp: Tensor4, cfg: ConvConfig, n: int) -> Im2colMatrix:
    """Build the (c*hf*wf, h_out*w_out) column matrix for image ``n``."""
    _require_operands_input_only(inp, cfg)
    if not 0 <= n < cfg.n:
        raise IndexError(f"image index {n} out of range [0, {cfg.n})")
    h_out, w_out = output_dims(cfg)
    arr = np.empty((cfg.c, cfg.hf, cfg.wf, h_out * w_out), dtype=np.float32)
    image = inp.data[n]
    for yf in range(cfg.hf):
        for xf in range(cfg.wf):
            shifted = _shifted_window(image, h_out, w_out,
                                      yf - cfg.pad_h, xf - cfg.pad_w, cfg.stride)
            arr[:, yf, xf, :] = shifted.reshape(cfg.c, -1)
    return Im2colMatrix(data=arr.reshape(cfg.c * cfg.hf * cfg.wf, h_out * w_out),
                        c=cfg.c, hf=cfg.hf, wf=cfg.wf, h_out=h_out, w_out=w_out)


def _require_operands_input_only(inp: Tensor4, cfg: ConvConfig) -> None:
    if inp.dims != input_dims(cfg):
        raise ShapeMismatch(f"input dims {inp.dims} != config {input_dims(cfg)}")


def gemm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with ascending-k accumulation.

    c[i, j] = sum_k a[i, k] * b[k, j], accumulated in index order from a
    zero start so the rounding sequence is reproducible.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeMismatch(f"gemm expects 2-D operands, got {a.ndim}-D and {b.ndim}-D")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"inner dims disagree: {a.shape} x {b.shape}")
    dtype = np.result_type(a, b)
    a = np.ascontiguousarray(a, dtype=dtype)
    b = np.ascontiguousarray(b, dtype=dtype)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=dtype)
    tmp = np.empty_like(out)
    for k in range(a.shape[1]):
        np.multiply(a[:, k, None], b[k], out=tmp)
        np.add(out, tmp, out=out)
    return out


def conv_gemm(inp: Tensor4, filters: Tensor4, cfg: ConvConfig) -> Tensor4:
    """Convolution as per-image im2col followed by a filter-matrix GEMM."""
    _require_operands(inp, filters, cfg)
    h_out, w_out = output_dims(cfg)
    filt = filters.data.reshape(cfg.m, cfg.c * cfg.hf * cfg.wf)
    out = np.empty((cfg.n, cfg.m, h_out, w_out), dtype=np.float32)
    for n in range(cfg.n):
        cols = im2col(inp, cfg, n)
        out[n] = gemm(filt, cols.data).reshape(cfg.m, h_out, w_out)
    return Tensor4(out)


# ---------------------------------------------------------------------------
# Winograd F(2x2, 3x3)
# ---------------------------------------------------------------------------

# minimal-filtering transforms for 2x2 output tiles from 3x3 filters
_BT = np.array([[1, 0, -1, 0],
                [0, 1, 1, 0],
                [0, -1, 1, 0],
                [0, 1, 0, -1]], dtype=np.float64)
_G = np.array([[1, 0, 0],
               [0.5, 0.5, 0.5],
               [0.5, -0.5, 0.5],
               [0, 0, 1]], dtype=np.float64)
_AT = np.array([[1, 1, 1, 0],
                [0, 1, -1, -1]], dtype=np.float64)


def conv_winograd_f22(inp: Tensor4, filters: Tensor4, cfg: ConvConfig) -> Tensor4:
    """Winograd convolution producing 2x2 output tiles from 3x3 filters.

    Stride 1 and 3x3 filters only.  Border tiles are zero-extended and
    excess tile outputs discarded.  Transforms and elementwise products run
    in float64 internally; the result is rounded to float32 once.
    """
    if cfg.hf != 3 or cfg.wf != 3:
        raise Unsupported(f"winograd F(2x2,3x3) requires 3x3 filters, got {cfg.hf}x{cfg.wf}")
    if cfg.stride != 1:
        raise Unsupported(f"winograd F(2x2,3x3) requires stride 1, got {cfg.stride}")
    _require_operands(inp, filters, cfg)
    h_out, w_out = output_dims(cfg)
    n, c, m = cfg.n, cfg.c, cfg.m
    ty = -(-h_out // 2)
    tx = -(-w_out // 2)

    # zero-extended staging buffer: conv padding plus tile overhang
    buf = np.zeros((n, c, 2 * ty + 2, 2 * tx + 2), dtype=np.float64)
    buf[:, :, cfg.pad_h:cfg.pad_h + cfg.h, cfg.pad_w:cfg.pad_w + cfg.w] = inp.data

    win = sliding_window_view(buf, (4, 4), axis=(2, 3))[:, :, ::2, ::2]
    v = np.einsum("ai,nctuij,bj->nctuab", _BT, win, _BT, optimize=True)
    u = np.einsum("ai,mcij,bj->mcab", _G, filters.data.astype(np.float64), _G,
                  optimize=True)

    vr = v.transpose(4, 5, 1, 0, 2, 3).reshape(16, c, n * ty * tx)
    ur = u.transpose(2, 3, 0, 1).reshape(16, m, c)
    prod = ur @ vr                                        # (16, m, n*ty*tx)
    prod = prod.reshape(4, 4, m, n, ty, tx)

    tiles = np.einsum("pa,qb,abmntu->nmtpuq", _AT, _AT, prod, optimize=True)
    full = tiles.reshape(n, m, 2 * ty, 2 * tx)
    return Tensor4(full[:, :, :h_out, :w_out].astype(np.float32))


# ---------------------------------------------------------------------------
# comparison metric
# ---------------------------------------------------------------------------

def relative_error(result, reference) -> float:
    """Max-norm relative error: linf(result - reference) / linf(reference).

    A zero reference with a nonzero result yields inf.
    """
    a = np.asarray(result.data if isinstance(result, Tensor4) else result,
                   dtype=np.float64)
    b = np.asarray(reference.data if isinstance(reference, Tensor4) else reference,
                   dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = float(np.max(np.abs(a - b))) if a.size else 0.0
    scale = float(np.max(np.abs(b))) if b.size else 0.0
    if diff == 0.0:
        return 0.0
    if scale == 0.0:
        return float("inf")
    return diff / scale
