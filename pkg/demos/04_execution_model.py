"""The analytical execution model: launch plans and memory coalescing.

plan_launch maps a layer onto thread blocks (one filter row per block,
split when a row's dot products exceed the block thread limit), and
coalescing_report simulates the cache-line traffic of every warp's stage-1
input reads.

Run with: python3 demos/04_execution_model.py
"""

from convkit import (ConvConfig, DeviceModel, coalescing_report, plan_launch,
                     preset_configs, theoretical_reuse)


def main():
    device = DeviceModel()
    print(f"device model: warp {device.warp_width}, line {device.line_bytes} B, "
          f"max {device.max_threads_per_block} threads/block")
    print()

    print("== launch plans for the bundled presets ==")
    print(f"{'config':<8} {'blocks':>7} {'threads':>8} {'split':>6} "
          f"{'dots/thread':>12}")
    for cfg in preset_configs():
        plan = plan_launch(cfg, device)
        print(f"{cfg.name:<8} {plan.blocks:>7} {plan.threads_per_block:>8} "
              f"{plan.split_per_filter_row:>6} {plan.dot_products_per_thread:>12}")

    print()
    print("== coalescing: aligned vs awkward plane widths ==")
    aligned = ConvConfig("w32", n=1, c=4, h=32, w=32, m=1, hf=1, wf=1)
    awkward = ConvConfig("w27", n=1, c=4, h=27, w=27, m=1, hf=1, wf=1)
    for cfg in (aligned, awkward):
        rep = coalescing_report(cfg, device)
        print(f"{cfg.name}: {rep.transactions_per_warp_mean:.3f} transactions/warp "
              f"over {rep.warps_total} warps "
              f"({rep.perfectly_coalesced_warps} perfectly coalesced)")
    print("32-wide rows line up with the 128-byte lines, so every warp")
    print("touches exactly one line; 27-wide rows straddle them.")

    print()
    print("== padding reads are free ==")
    padded = ConvConfig("pad", n=1, c=4, h=13, w=13, m=1, hf=3, wf=3,
                        pad_h=1, pad_w=1)
    rep = coalescing_report(padded, device)
    print(f"{padded.name}: {rep.transactions_per_warp_mean:.3f} transactions/warp, "
          f"{rep.warps_total} active warps")

    print()
    print("== theoretical reuse bounds ==")
    for cfg in preset_configs():
        row_reuse, element_reuse = theoretical_reuse(cfg)
        print(f"{cfg.name:<8} each filter row serves {row_reuse:>3} positions; "
              f"each input element is read by up to {element_reuse:>2} placements")


if __name__ == "__main__":
    main()
