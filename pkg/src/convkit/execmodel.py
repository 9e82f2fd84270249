"""Analytical GPU execution model for the two-stage convolution.

The model covers two questions without touching real hardware:

- how a config maps onto thread blocks (``plan_launch``), one filter row
  per block with large workloads split across several blocks, and
- how well the stage-1 global-memory reads coalesce (``coalescing_report``),
  by simulating the addresses each 32-thread warp reads and counting the
  distinct cache lines they touch.

Model assumptions, fixed here and relied on by the tests:

- threads map to consecutive output positions, x fastest, within the
  filter-row patch; thread t of a block covers position chunk_start + t
  (for blocks with more than one dot product per thread, the first round
  is taken as representative);
- each image's plane array starts line-aligned; the element address for
  (c, y_in, x_in) is c*h*w + y_in*w + x_in;
- reads that fall into the zero padding issue no memory transaction;
- moving to the next channel shifts every address by one plane, which
  preserves the line structure when the plane byte size is a multiple of
  the line size; otherwise min(c, 4) channel iterations are simulated and
  the per-warp transaction count is their average.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .configs import ConvConfig, output_dims
from .errors import InvalidConfig, InvalidPlan, Unsupported


@dataclass(frozen=True)
class DeviceModel:
    """Device limits relevant to the launch and coalescing model."""

    warp_width: int = 32
    line_bytes: int = 128
    max_threads_per_block: int = 1024
    element_bytes: int = 4

    def __post_init__(self):
        for field in ("warp_width", "line_bytes", "max_threads_per_block", "element_bytes"):
            if getattr(self, field) < 1:
                raise InvalidConfig(field, f"must be >= 1, got {getattr(self, field)}")
        if self.line_bytes % self.element_bytes != 0:
            raise InvalidConfig("line_bytes",
                                f"{self.line_bytes} not a multiple of element size "
                                f"{self.element_bytes}")

    @property
    def elements_per_line(self) -> int:
        return self.line_bytes // self.element_bytes


@dataclass(frozen=True)
class LaunchPlan:
    """Block decomposition of stage 1 for one config."""

    blocks: int
    threads_per_block: int
    split_per_filter_row: int
    dot_products_per_thread: int


def _round_up(value: int, multiple: int) -> int:
    return -(-value // multiple) * multiple


def plan_launch(cfg: ConvConfig, device: DeviceModel | None = None) -> LaunchPlan:
    """Choose the stage-1 launch shape for ``cfg`` under ``device`` limits.

    One filter row is assigned per block; a row whose n*h_out*w_out dot
    products exceed the per-block thread limit is split across
    ceil(work / max_threads) blocks.  Thread counts are rounded up to a
    whole number of warps.
    """
    if cfg.stride != 1:
        raise Unsupported(f"launch planning covers stride 1, got {cfg.stride}")
    device = device or DeviceModel()
    h_out, w_out = output_dims(cfg)
    work = cfg.n * h_out * w_out
    split = -(-work // device.max_threads_per_block)
    threads = min(work, device.max_threads_per_block)
    threads = _round_up(threads, device.warp_width)
    if threads > device.max_threads_per_block:
        # device limit not a warp multiple; fall back to the largest one
        threads = max(device.warp_width,
                      device.max_threads_per_block // device.warp_width * device.warp_width)
        threads = min(threads, device.max_threads_per_block)
    dot_products = -(-work // (split * threads))
    return LaunchPlan(blocks=cfg.m * cfg.hf * cfg.wf * split,
                      threads_per_block=threads,
                      split_per_filter_row=split,
                      dot_products_per_thread=dot_products)


def validate_plan(plan: LaunchPlan, cfg: ConvConfig,
                  device: DeviceModel | None = None) -> None:
    """Check plan invariants against a config; raise InvalidPlan if violated."""
    device = device or DeviceModel()
    h_out, w_out = output_dims(cfg)
    work = cfg.n * h_out * w_out
    if plan.split_per_filter_row < 1:
        raise InvalidPlan(f"split_per_filter_row must be >= 1, got {plan.split_per_filter_row}")
    if plan.blocks != cfg.m * cfg.hf * cfg.wf * plan.split_per_filter_row:
        raise InvalidPlan(f"blocks {plan.blocks} != m*hf*wf*split = "
                          f"{cfg.m * cfg.hf * cfg.wf * plan.split_per_filter_row}")
    if not 1 <= plan.threads_per_block <= device.max_threads_per_block:
        raise InvalidPlan(f"threads_per_block {plan.threads_per_block} outside "
                          f"[1, {device.max_threads_per_block}]")
    if plan.threads_per_block % device.warp_width != 0:
        raise InvalidPlan(f"threads_per_block {plan.threads_per_block} not a multiple "
                          f"of warp width {device.warp_width}")
    if plan.dot_products_per_thread < 1:
        raise InvalidPlan("dot_products_per_thread must be >= 1")
    covered = plan.blocks * plan.threads_per_block * plan.dot_products_per_thread
    total = cfg.m * cfg.hf * cfg.wf * work
    if covered < total:
        raise InvalidPlan(f"plan covers {covered} dot products, workload needs {total}")


def block_position_ranges(work: int, split: int) -> list[tuple[int, int]]:
    """Contiguous, balanced [lo, hi) position ranges of one filter row's work."""
    return [(i * work // split, (i + 1) * work // split) for i in range(split)]


@dataclass(frozen=True)
class CoalescingReport:
    """Aggregate warp-level transaction counts for stage-1 input reads."""

    transactions_total: float
    warps_total: int
    transactions_per_warp_mean: float
    perfectly_coalesced_warps: int


def modeled_channels(cfg: ConvConfig, device: DeviceModel) -> int:
    """Channel iterations the simulator runs (1 when planes are line-aligned)."""
    plane_bytes = cfg.h * cfg.w * device.element_bytes
    if cfg.c == 1 or plane_bytes % device.line_bytes == 0:
        return 1
    return min(cfg.c, 4)


def coalescing_report(cfg: ConvConfig, device: DeviceModel | None = None,
                      plan: LaunchPlan | None = None) -> CoalescingReport:
    """Simulate stage-1 read coalescing for every warp of every block.

    Blocks that differ only in their filter index read identical input
    addresses, so the simulation runs once per (filter row, split chunk)
    and scales the counts by m.  Warps whose reads land entirely in the
    padding are idle and excluded from the aggregate.
    """
    if cfg.stride != 1:
        raise Unsupported(f"coalescing model covers stride 1, got {cfg.stride}")
    device = device or DeviceModel()
    plan = plan or plan_launch(cfg, device)
    validate_plan(plan, cfg, device)

    h_out, w_out = output_dims(cfg)
    plane = cfg.h * cfg.w
    positions_per_image = h_out * w_out
    work = cfg.n * positions_per_image
    epl = device.elements_per_line
    channels = modeled_channels(cfg, device)
    lines_per_image = cfg.c * plane // epl + 1  # keys of distinct images never collide

    warps_total = 0
    txn_numer = 0
    perfect = 0
    ranges = block_position_ranges(work, plan.split_per_filter_row)
    for k in range(cfg.hf * cfg.wf):
        yf, xf = divmod(k, cfg.wf)
        dy = yf - cfg.pad_h
        dx = xf - cfg.pad_w
        for lo, hi in ranges:
            hi = min(hi, lo + plan.threads_per_block)  # representative round
            if hi <= lo:
                continue
            pos = np.arange(lo, hi)
            img = pos // positions_per_image
            rem = pos % positions_per_image
            y_in = rem // w_out + dy
            x_in = rem % w_out + dx
            valid = (y_in >= 0) & (y_in < cfg.h) & (x_in >= 0) & (x_in < cfg.w)
            base = y_in * cfg.w + x_in
            for w0 in range(0, hi - lo, device.warp_width):
                sel = valid[w0:w0 + device.warp_width]
                if not sel.any():
                    continue  # idle warp: all reads in padding
                lane_img = img[w0:w0 + device.warp_width][sel]
                lane_base = base[w0:w0 + device.warp_width][sel]
                numer = 0
                for ch in range(channels):
                    keys = lane_img * lines_per_image + (ch * plane + lane_base) // epl
                    numer += np.unique(keys).size
                warps_total += 1
                txn_numer += numer
                if numer == channels:
                    perfect += 1

    # every filter (m) replays the same addresses
    warps_total *= cfg.m
    txn_numer *= cfg.m
    perfect *= cfg.m
    total = txn_numer / channels
    mean = total / warps_total if warps_total else 0.0
    return CoalescingReport(transactions_total=total,
                            warps_total=warps_total,
                            transactions_per_warp_mean=mean,
                            perfectly_coalesced_warps=perfect)


def theoretical_reuse(cfg: ConvConfig) -> tuple[int, int]:
    """Upper bounds on data reuse at stride 1.

    Returns (row_reuse, max_element_reuse): each filter row serves
    h_out*w_out sliding positions per image, and a single input element is
    touched by at most hf*wf filter placements.
    """
    if cfg.stride != 1:
        raise Unsupported(f"reuse model covers stride 1, got {cfg.stride}")
    h_out, w_out = output_dims(cfg)
    return h_out * w_out, cfg.hf * cfg.wf
