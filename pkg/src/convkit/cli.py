"""Command line interface: ``bench run``, ``bench analyze``, ``bench validate``.

Exit codes: 0 on success, 1 on failure (validation mismatch or runtime
error), 2 on usage errors (argparse's convention).
"""

from __future__ import annotations

import argparse
import sys

from .bench import ALGORITHMS, emit_report, run_bench
from .configs import parse_config_file, preset_configs
from .errors import ConvKitError, Unsupported
from .execmodel import DeviceModel, coalescing_report, plan_launch

ANALYZE_HEADER = ("config,batch,blocks,threads_per_block,split,dot_products_per_thread,"
                  "warps_total,transactions_total,txn_per_warp,perfectly_coalesced_warps")


def _comma_ints(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _comma_algos(text: str) -> list[str]:
    algos = [p.strip() for p in text.split(",") if p.strip()]
    for algo in algos:
        if algo not in ALGORITHMS:
            raise argparse.ArgumentTypeError(
                f"unknown algorithm {algo!r} (choose from {', '.join(ALGORITHMS)})")
    return algos


def _load_configs(source: str):
    if source == "presets":
        return preset_configs()
    return parse_config_file(source)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark, analyze and validate the convolution algorithms.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="time algorithms and write a report")
    run_p.add_argument("--configs", default="presets",
                       help="config CSV path, or 'presets' for the bundled shapes")
    run_p.add_argument("--algos", type=_comma_algos, default=["gemm", "twostage"],
                       help="comma-separated algorithms "
                            f"(any of: {','.join(ALGORITHMS)})")
    run_p.add_argument("--batches", type=_comma_ints, default=[1],
                       help="comma-separated batch sizes (replace each config's n)")
    run_p.add_argument("--repeats", type=int, default=9,
                       help="timed repetitions per combination (default 9)")
    run_p.add_argument("--workspace-limit", type=int, default=1_073_741_824,
                       help="workspace cap in bytes (default 1 GiB)")
    run_p.add_argument("--seed", type=int, default=0, help="data-generation seed")
    run_p.add_argument("--baseline", default="gemm", choices=ALGORITHMS,
                       help="algorithm speedups are measured against")
    run_p.add_argument("--out", required=True, help="report output path")
    run_p.add_argument("--format", default="csv", choices=["csv", "md"],
                       help="report format")

    an_p = sub.add_parser("analyze",
                          help="execution-model analysis (plans and coalescing), no timing")
    an_p.add_argument("--configs", default="presets")
    an_p.add_argument("--batches", type=_comma_ints, default=[1])
    an_p.add_argument("--out", required=True, help="analysis CSV output path")

    val_p = sub.add_parser("validate", help="oracle checks only, no timing")
    val_p.add_argument("--configs", default="presets")
    val_p.add_argument("--algos", type=_comma_algos,
                       default=["naive", "gemm", "winograd", "twostage"])
    val_p.add_argument("--batches", type=_comma_ints, default=[1])
    val_p.add_argument("--seed", type=int, default=0)
    val_p.add_argument("--workspace-limit", type=int, default=1_073_741_824)
    return parser


def _cmd_run(args) -> int:
    configs = _load_configs(args.configs)
    records = run_bench(configs, algorithms=args.algos, batch_sizes=args.batches,
                        repeats=args.repeats, workspace_limit=args.workspace_limit,
                        seed=args.seed, baseline=args.baseline)
    emit_report(records, args.out, format=args.format)
    ran = sum(1 for r in records if not r.skipped)
    skipped = len(records) - ran
    failed = sum(1 for r in records if not r.skipped and not r.validated)
    print(f"wrote {args.out}: {ran} runs, {skipped} skipped, {failed} failed validation")
    return 1 if failed else 0


def _cmd_analyze(args) -> int:
    configs = _load_configs(args.configs)
    device = DeviceModel()
    lines = [ANALYZE_HEADER]
    for cfg in configs:
        for batch in args.batches:
            bcfg = cfg.with_batch(batch)
            try:
                plan = plan_launch(bcfg, device)
            except Unsupported as exc:
                print(f"skipping {bcfg.name} (batch {batch}): {exc}", file=sys.stderr)
                continue
            rep = coalescing_report(bcfg, device, plan)
            lines.append(",".join([
                bcfg.name, str(batch), str(plan.blocks), str(plan.threads_per_block),
                str(plan.split_per_filter_row), str(plan.dot_products_per_thread),
                str(rep.warps_total), f"{rep.transactions_total:.6f}",
                f"{rep.transactions_per_warp_mean:.6f}",
                str(rep.perfectly_coalesced_warps),
            ]))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {args.out}: {len(lines) - 1} rows")
    return 0


def _cmd_validate(args) -> int:
    configs = _load_configs(args.configs)
    records = run_bench(configs, algorithms=args.algos, batch_sizes=args.batches,
                        repeats=1, workspace_limit=args.workspace_limit,
                        seed=args.seed)
    failures = 0
    for r in records:
        if r.skipped:
            print(f"skip {r.config} {r.algorithm} batch={r.batch}: {r.skip_reason}")
        elif r.validated:
            print(f"ok   {r.config} {r.algorithm} batch={r.batch} "
                  f"rel_err={r.max_rel_error:.3g}")
        else:
            failures += 1
            print(f"FAIL {r.config} {r.algorithm} batch={r.batch} "
                  f"rel_err={r.max_rel_error:.3g}")
    if failures:
        print(f"{failures} validation failure(s)")
        return 1
    print("all validations passed")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "analyze":
            return _cmd_analyze(args)
        return _cmd_validate(args)
    except (ConvKitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
