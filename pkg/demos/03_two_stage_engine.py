"""The two-stage engine: filter-row dot products, then partial-sum reduction.

Stage 1 turns convolution into many small dot products: one filter row
(the C elements at a fixed filter offset) dotted against the input rows it
overlaps, one partial-sum plane per (filter row k, image, filter).  Stage 2
adds the hf*wf partials per output element.  1x1 filters have a single
partial, so stage 1 writes the output directly and stage 2 is skipped.

Run with: python3 demos/03_two_stage_engine.py
"""

from convkit import (ConvConfig, conv_naive, conv_twostage, filter_dims,
                     input_dims, make_tensor, plan_launch, stage1_scalar_prods,
                     stage2_sum, workspace_bytes)


def main():
    cfg = ConvConfig("demo", n=1, c=8, h=6, w=6, m=4, hf=3, wf=3,
                     pad_h=1, pad_w=1)
    inp = make_tensor(input_dims(cfg), "uniform", seed=7)
    filt = make_tensor(filter_dims(cfg), "uniform", seed=8)

    print(f"layer: {cfg.h}x{cfg.w}x{cfg.c} -> {cfg.m} filters of {cfg.hf}x{cfg.wf}")
    print()

    print("== stage 1: partial sums ==")
    partials, stats = stage1_scalar_prods(inp, filt, cfg)
    print(f"partials buffer: {partials.dims}  (k, n, m, h_out, w_out)")
    print(f"               = {partials.byte_size} bytes "
          f"(closed form: {workspace_bytes(cfg)})")
    print(f"stage-1 blocks run: {stats.stage1_tasks_run}, one filter-row "
          f"load each: {stats.filter_row_global_loads}")

    print()
    print("== stage 2: k-ascending reduction ==")
    out, _ = stage2_sum(partials, cfg)
    direct = conv_naive(inp, filt, cfg)
    print(f"stage1+stage2 == conv_naive bitwise: "
          f"{out.data.tobytes() == direct.data.tobytes()}")

    print()
    print("== the fused 1x1 path ==")
    c1 = ConvConfig("pointwise", n=1, c=32, h=7, w=7, m=16, hf=1, wf=1)
    i1 = make_tensor(input_dims(c1), "uniform", seed=9)
    f1 = make_tensor(filter_dims(c1), "uniform", seed=10)
    out1, stats1 = conv_twostage(i1, f1, c1)
    print(f"stage2_invoked={stats1.stage2_invoked}, "
          f"workspace_bytes={stats1.workspace_bytes}")
    print(f"fused output == conv_naive bitwise: "
          f"{out1.data.tobytes() == conv_naive(i1, f1, c1).data.tobytes()}")

    print()
    print("== schedule independence ==")
    print("the summation order is a per-element property, so neither the")
    print("launch plan nor the worker count can change a single bit:")
    base, _ = conv_twostage(inp, filt, cfg)
    plan = plan_launch(cfg)
    print(f"default plan: {plan}")
    for workers in (1, 4, 8):
        alt, _ = conv_twostage(inp, filt, cfg, workers=workers)
        print(f"  workers={workers}: identical "
              f"{alt.data.tobytes() == base.data.tobytes()}")


if __name__ == "__main__":
    main()
