"""Benchmark harness: time the algorithms, validate against the oracle,
and emit CSV or markdown reports.

Every (config, batch, algorithm) combination yields exactly one record:
either a timed run (validated against conv_naive_f64) or a skip row whose
reason names the failed precondition.  Inputs and filters are drawn
uniformly from [-1, 1) with seeds derived from the harness seed, so a
rerun with the same seed reproduces the validated, workspace_bytes and
txn_per_warp columns exactly.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .configs import ConvConfig, filter_dims, input_dims
from .errors import ConvKitError
from .execmodel import DeviceModel, coalescing_report, plan_launch
from .reference import conv_gemm, conv_naive, conv_naive_f64, conv_winograd_f22, relative_error
from .tensor import make_tensor
from .twostage import DEFAULT_WORKSPACE_LIMIT, conv_twostage, workspace_bytes

ALGORITHMS = ("naive", "gemm", "winograd", "twostage")

#: max relative error vs the float64 oracle for a run to count as validated
VALIDATION_TOLERANCES = {
    "naive": 1e-4,
    "gemm": 1e-4,
    "twostage": 1e-4,
    "winograd": 1e-3,
}

CSV_HEADER = "config,algorithm,batch,repeats,mean_us,min_us,stddev_us,speedup,validated,workspace_bytes,txn_per_warp"


@dataclass
class BenchRecord:
    """One row of a benchmark run (a timed result or a skip)."""

    config: str
    algorithm: str
    batch: int
    repeats: int = 0
    mean_us: float | None = None
    min_us: float | None = None
    stddev_us: float | None = None
    speedup: float | None = None
    validated: bool | None = None
    workspace_bytes: int | None = None
    txn_per_warp: float | None = None
    skipped: bool = False
    skip_reason: str | None = None
    max_rel_error: float | None = None
    # shape metadata carried for the markdown report
    filter_tag: str = field(default="", repr=False)
    label: str = field(default="", repr=False)


def skip_reason(algorithm: str, cfg: ConvConfig,
                workspace_limit: int = DEFAULT_WORKSPACE_LIMIT) -> str | None:
    """Why ``algorithm`` cannot run on ``cfg``, or None if it can."""
    if algorithm not in ALGORITHMS:
        raise ConvKitError(f"unknown algorithm {algorithm!r}")
    if algorithm == "winograd":
        if (cfg.hf, cfg.wf) != (3, 3):
            return "Unsupported: filter size"
        if cfg.stride != 1:
            return "Unsupported: stride"
    elif algorithm == "twostage":
        if cfg.stride != 1:
            return "Unsupported: stride"
        if workspace_bytes(cfg) > workspace_limit:
            return "WorkspaceExceeded"
    return None


def _runner(algorithm: str, inp, filt, cfg, workspace_limit, device, plan):
    if algorithm == "naive":
        return lambda: conv_naive(inp, filt, cfg)
    if algorithm == "gemm":
        return lambda: conv_gemm(inp, filt, cfg)
    if algorithm == "winograd":
        return lambda: conv_winograd_f22(inp, filt, cfg)
    return lambda: conv_twostage(inp, filt, cfg, device, workspace_limit, plan=plan)[0]


def run_bench(configs, algorithms=("gemm", "twostage"), batch_sizes=(1,),
              repeats: int = 9, workspace_limit: int = DEFAULT_WORKSPACE_LIMIT,
              seed: int = 0, baseline: str = "gemm",
              device: DeviceModel | None = None) -> list[BenchRecord]:
    """Time ``algorithms`` over ``configs`` x ``batch_sizes``.

    Each present algorithm is run once for warm-up and ``repeats`` timed
    times (monotonic clock around the convolution call only), validated
    against the double-precision oracle, and assigned a speedup relative
    to ``baseline``'s mean on the same (config, batch).
    """
    if repeats < 1:
        raise ConvKitError(f"repeats must be >= 1, got {repeats}")
    for algo in algorithms:
        if algo not in ALGORITHMS:
            raise ConvKitError(f"unknown algorithm {algo!r}")
    device = device or DeviceModel()
    records: list[BenchRecord] = []
    for idx, cfg in enumerate(configs):
        for batch in batch_sizes:
            bcfg = cfg.with_batch(batch)
            tag = f"{bcfg.hf}x{bcfg.wf}"
            label = f"{bcfg.h}-{bcfg.m}-{bcfg.c}"
            reasons = {algo: skip_reason(algo, bcfg, workspace_limit) for algo in algorithms}
            group: list[BenchRecord] = []

            oracle = None
            if any(r is None for r in reasons.values()):
                seed_in, seed_f = np.random.SeedSequence([seed, idx, batch]).generate_state(2)
                inp = make_tensor(input_dims(bcfg), "uniform", seed=int(seed_in))
                filt = make_tensor(filter_dims(bcfg), "uniform", seed=int(seed_f))
                oracle = conv_naive_f64(inp, filt, bcfg)

            for algo in algorithms:
                reason = reasons[algo]
                if reason is not None:
                    group.append(BenchRecord(
                        config=bcfg.name, algorithm=algo, batch=batch,
                        skipped=True, skip_reason=reason,
                        workspace_bytes=workspace_bytes(bcfg) if algo == "twostage" else None,
                        filter_tag=tag, label=label))
                    continue
                plan = plan_launch(bcfg, device) if algo == "twostage" else None
                fn = _runner(algo, inp, filt, bcfg, workspace_limit, device, plan)
                result = fn()  # warm-up
                times_us = []
                for _ in range(repeats):
                    t0 = time.perf_counter()
                    result = fn()
                    t1 = time.perf_counter()
                    times_us.append((t1 - t0) * 1e6)
                err = relative_error(result, oracle)
                rec = BenchRecord(
                    config=bcfg.name, algorithm=algo, batch=batch, repeats=repeats,
                    mean_us=statistics.fmean(times_us),
                    min_us=min(times_us),
                    stddev_us=statistics.stdev(times_us) if repeats > 1 else 0.0,
                    validated=bool(err <= VALIDATION_TOLERANCES[algo]),
                    max_rel_error=err,
                    filter_tag=tag, label=label)
                if algo == "twostage":
                    rec.workspace_bytes = workspace_bytes(bcfg)
                    rec.txn_per_warp = coalescing_report(bcfg, device, plan).transactions_per_warp_mean
                group.append(rec)

            base = next((r for r in group
                         if r.algorithm == baseline and not r.skipped), None)
            if base is not None:
                for rec in group:
                    if not rec.skipped:
                        rec.speedup = base.mean_us / rec.mean_us
            records.extend(group)
    return records


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------

def _fmt(value, spec=".3f") -> str:
    return "" if value is None else format(value, spec)


def _csv_row(r: BenchRecord) -> str:
    if r.skipped:
        validated = f"skipped({r.skip_reason})"
    else:
        validated = "true" if r.validated else "false"
    ws = "" if r.workspace_bytes is None else str(r.workspace_bytes)
    return ",".join([
        r.config, r.algorithm, str(r.batch), str(r.repeats),
        _fmt(r.mean_us), _fmt(r.min_us), _fmt(r.stddev_us),
        _fmt(r.speedup, ".4f"), validated, ws, _fmt(r.txn_per_warp, ".6f"),
    ])


def _markdown(records: list[BenchRecord]) -> str:
    lines = ["# Benchmark report", ""]
    seen: list[str] = []
    for r in records:
        if r.filter_tag not in seen:
            seen.append(r.filter_tag)
    for tag in seen:
        lines.append(f"## {tag} filters")
        lines.append("")
        lines.append("| config | algorithm | batch | mean_us | speedup | validated | txn_per_warp |")
        lines.append("|---|---|---|---|---|---|---|")
        for r in records:
            if r.filter_tag != tag:
                continue
            label = r.label or r.config
            if r.skipped:
                lines.append(f"| {label} | {r.algorithm} | {r.batch} | skipped: "
                             f"{r.skip_reason} |  |  |  |")
            else:
                lines.append(f"| {label} | {r.algorithm} | {r.batch} | "
                             f"{r.mean_us:.1f} | {_fmt(r.speedup, '.2f')} | "
                             f"{'true' if r.validated else 'false'} | "
                             f"{_fmt(r.txn_per_warp, '.3f')} |")
        lines.append("")
    return "\n".join(lines)


def emit_report(records: list[BenchRecord], path, format: str = "csv") -> None:
    """Write records to ``path`` as CSV or markdown.

    Raises on an empty record list before touching the filesystem;
    unwritable paths surface as OSError.
    """
    if not records:
        raise ConvKitError("no records to report")
    if format == "csv":
        text = "\n".join([CSV_HEADER] + [_csv_row(r) for r in records]) + "\n"
    elif format in ("md", "markdown"):
        text = _markdown(records) + "\n"
    else:
        raise ConvKitError(f"unknown report format {format!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
