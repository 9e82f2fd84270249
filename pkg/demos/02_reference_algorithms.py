"""The reference algorithms and how they are checked against each other.

conv_naive is the semantic anchor (float32, pinned summation order),
conv_naive_f64 the accuracy oracle, conv_gemm the im2col+GEMM lowering and
conv_winograd_f22 the minimal-filtering variant for 3x3 filters.

Run with: python3 demos/02_reference_algorithms.py
"""

import numpy as np

from convkit import (ConvConfig, Tensor4, conv_gemm, conv_naive, conv_naive_f64,
                     conv_winograd_f22, filter_dims, im2col, input_dims,
                     make_tensor, relative_error)


def main():
    cfg = ConvConfig("demo", n=2, c=16, h=13, w=13, m=8, hf=3, wf=3,
                     pad_h=1, pad_w=1)
    inp = make_tensor(input_dims(cfg), "uniform", seed=1)
    filt = make_tensor(filter_dims(cfg), "uniform", seed=2)

    print(f"layer: {cfg.h}x{cfg.w}x{cfg.c} -> {cfg.m} filters of {cfg.hf}x{cfg.wf}")
    print()

    oracle = conv_naive_f64(inp, filt, cfg)
    results = {
        "naive": conv_naive(inp, filt, cfg),
        "gemm": conv_gemm(inp, filt, cfg),
        "winograd": conv_winograd_f22(inp, filt, cfg),
    }
    print("max relative error vs the float64 oracle:")
    for name, out in results.items():
        print(f"  {name:<9} {relative_error(out, oracle):.3e}")

    print()
    print("naive and gemm share the same pinned summation order, so on")
    print("integer-valued data (exact float32 arithmetic) they agree bitwise:")
    icfg = ConvConfig("ints", n=1, c=4, h=6, w=6, m=3, hf=3, wf=3, pad_h=1, pad_w=1)
    rng = np.random.default_rng(3)
    iinp = Tensor4(rng.integers(-2, 3, size=input_dims(icfg)).astype(np.float32))
    ifilt = Tensor4(rng.integers(-2, 3, size=filter_dims(icfg)).astype(np.float32))
    a = conv_naive(iinp, ifilt, icfg)
    b = conv_gemm(iinp, ifilt, icfg)
    print(f"  bitwise identical: {a.data.tobytes() == b.data.tobytes()}")

    print()
    print("im2col unrolls each receptive field into one matrix column:")
    mat = im2col(inp, cfg, 0)
    print(f"  matrix shape: {mat.rows} x {mat.cols} "
          f"(c*hf*wf = {cfg.c * 9}, h_out*w_out = {13 * 13})")
    print(f"  corner column starts with the zero padding: "
          f"{mat.data[:4, mat.col_index(0, 0)].tolist()}")

    print()
    print("winograd F(2x2,3x3) computes 2x2 output tiles with 16 multiplies")
    print("instead of 36; a centre-delta filter reproduces the input exactly:")
    dcfg = ConvConfig("delta", n=1, c=1, h=6, w=6, m=1, hf=3, wf=3, pad_h=1, pad_w=1)
    dinp = make_tensor(input_dims(dcfg), "uniform", seed=4)
    delta = np.zeros((1, 1, 3, 3), dtype=np.float32)
    delta[0, 0, 1, 1] = 1.0
    out = conv_winograd_f22(dinp, Tensor4(delta), dcfg)
    print(f"  identity holds bitwise: {out.data.tobytes() == dinp.data.tobytes()}")


if __name__ == "__main__":
    main()
