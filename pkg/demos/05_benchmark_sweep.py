"""A small benchmark sweep through the library API.

run_bench times each algorithm, validates every result against the
float64 oracle, and attaches the execution-model columns; emit_report
writes the CSV consumed by the `bench` CLI's users.

Run with: python3 demos/05_benchmark_sweep.py
"""

import tempfile
from pathlib import Path

from convkit import ConvConfig, emit_report, run_bench

LAYERS = [
    ConvConfig("point", n=1, c=64, h=14, w=14, m=64, hf=1, wf=1),
    ConvConfig("small3", n=1, c=32, h=13, w=13, m=32, hf=3, wf=3,
               pad_h=1, pad_w=1),
    ConvConfig("small5", n=1, c=16, h=9, w=9, m=24, hf=5, wf=5,
               pad_h=2, pad_w=2),
]


def main():
    records = run_bench(LAYERS, algorithms=("gemm", "twostage", "winograd"),
                        batch_sizes=(1, 4), repeats=5, seed=0)

    print(f"{'config':<8} {'algo':<9} {'batch':>5} {'mean_us':>10} "
          f"{'speedup':>8} {'ok':>3} {'txn/warp':>9}")
    for r in records:
        if r.skipped:
            print(f"{r.config:<8} {r.algorithm:<9} {r.batch:>5} "
                  f"{'skipped: ' + r.skip_reason}")
            continue
        txn = f"{r.txn_per_warp:.3f}" if r.txn_per_warp is not None else ""
        print(f"{r.config:<8} {r.algorithm:<9} {r.batch:>5} {r.mean_us:>10.1f} "
              f"{r.speedup:>8.2f} {str(r.validated):>3} {txn:>9}")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "report.csv"
        emit_report(records, path)
        lines = path.read_text().splitlines()
        print()
        print(f"emit_report wrote {len(lines) - 1} rows; header:")
        print(f"  {lines[0]}")

    print()
    print("the same sweep from the command line:")
    print("  bench run --configs layers.csv --algos gemm,twostage,winograd \\")
    print("            --batches 1,4 --repeats 5 --out report.csv")


if __name__ == "__main__":
    main()
