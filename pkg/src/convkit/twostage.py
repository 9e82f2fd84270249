"""Two-stage convolution built from filter-row dot products.

Stage 1 dots every filter row (one row of one filter, across all
channels) against the input rows it overlaps, producing one partial-sum
plane per (filter row, image, filter).  Stage 2 adds the hf*wf partial
planes per output element.  For 1x1 filters there is exactly one partial
per element, so stage 1 writes the output directly and stage 2 is skipped.

Floating-point order is pinned so results are reproducible bit for bit:
channels accumulate in ascending order within a row dot product and rows
add in ascending row index, every chain starting from +0.0.  The order is
a per-element property, so outputs do not depend on the launch plan or on
how many workers execute the schedule.

A stage-1 block is realised as one schedulable task that first stages its
filter row into a local buffer (modelling the shared-memory load counted
by RunStats) and then runs its assigned dot products.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .configs import ConvConfig, filter_dims, input_dims, output_dims
from .errors import ShapeMismatch, Unsupported, WorkspaceExceeded
from .execmodel import DeviceModel, LaunchPlan, block_position_ranges, plan_launch, validate_plan
from .tensor import Tensor4

#: default cap on the stage-1 partial-sum buffer (1 GiB)
DEFAULT_WORKSPACE_LIMIT = 1_073_741_824


def workspace_bytes(cfg: ConvConfig) -> int:
    """Temporary bytes conv_twostage needs for ``cfg``.

    4 * hf * wf * n * m * h_out * w_out for the partial-sum buffer; 0 for
    1x1 filters, whose single partial is written straight into the output.
    """
    if cfg.hf == 1 and cfg.wf == 1:
        return 0
    h_out, w_out = output_dims(cfg)
    return 4 * cfg.hf * cfg.wf * cfg.n * cfg.m * h_out * w_out


@dataclass
class RunStats:
    """Instrumentation counters for a two-stage run."""

    stage1_tasks_run: int = 0
    stage2_invoked: bool = False
    filter_row_global_loads: int = 0
    workspace_bytes: int = 0


@dataclass
class PartialSums:
    """Stage-1 output buffer, laid out (k, n, m, h_out, w_out), x fastest."""

    data: np.ndarray

    @property
    def dims(self) -> tuple[int, int, int, int, int]:
        return self.data.shape

    @property
    def byte_size(self) -> int:
        return self.data.nbytes


def _check_stride1_operands(inp: Tensor4, filters: Tensor4, cfg: ConvConfig) -> None:
    if cfg.stride != 1:
        raise Unsupported(f"two-stage convolution requires stride 1, got {cfg.stride}")
    if inp.dims != input_dims(cfg):
        raise ShapeMismatch(f"input dims {inp.dims} != config {input_dims(cfg)}")
    if filters.dims != filter_dims(cfg):
        raise ShapeMismatch(f"filter dims {filters.dims} != config {filter_dims(cfg)}")


def _shifted_rows(inp: Tensor4, cfg: ConvConfig) -> list[np.ndarray]:
    """Per filter row k: a (c, n*h_out*w_out) array of the input elements
    each output position reads, with padding already zeroed."""
    h_out, w_out = output_dims(cfg)
    rows = []
    src = inp.data.transpose(1, 0, 2, 3)  # (c, n, h, w) view
    for k in range(cfg.hf * cfg.wf):
        yf, xf = divmod(k, cfg.wf)
        dy = yf - cfg.pad_h
        dx = xf - cfg.pad_w
        shifted = np.zeros((cfg.c, cfg.n, h_out, w_out), dtype=np.float32)
        y0, y1 = max(0, -dy), min(h_out, cfg.h - dy)
        x0, x1 = max(0, -dx), min(w_out, cfg.w - dx)
        if y1 > y0 and x1 > x0:
            shifted[:, :, y0:y1, x0:x1] = src[:, :, y0 + dy:y1 + dy, x0 + dx:x1 + dx]
        rows.append(shifted.reshape(cfg.c, -1))
    return rows


def _run_block(shifted: np.ndarray, filter_row: np.ndarray, target_k: np.ndarray,
               m: int, lo: int, hi: int, positions_per_image: int) -> None:
    """Execute one stage-1 block: dot its filter row against positions [lo, hi)."""
    if hi <= lo:
        return
    staged = filter_row.copy()  # the block's one global filter-row load
    acc = np.zeros(hi - lo, dtype=np.float32)
    tmp = np.empty_like(acc)
    for ch in range(staged.shape[0]):
        np.multiply(shifted[ch, lo:hi], staged[ch], out=tmp)
        np.add(acc, tmp, out=acc)
    p = positions_per_image
    for img in range(lo // p, (hi - 1) // p + 1):
        s, e = max(lo, img * p), min(hi, (img + 1) * p)
        target_k[img, m].reshape(-1)[s - img * p:e - img * p] = acc[s - lo:e - lo]


def _stage1_into(targets: list[np.ndarray], inp: Tensor4, filters: Tensor4,
                 cfg: ConvConfig, plan: LaunchPlan, workers: int) -> tuple[int, int]:
    """Run all stage-1 blocks, writing partials into targets[k]; returns
    (tasks_run, filter_row_loads)."""
    h_out, w_out = output_dims(cfg)
    positions_per_image = h_out * w_out
    work = cfg.n * positions_per_image
    shifted_rows = _shifted_rows(inp, cfg)
    filter_rows = [np.ascontiguousarray(filters.data[:, :, yf, xf])
                   for yf in range(cfg.hf) for xf in range(cfg.wf)]
    ranges = block_position_ranges(work, plan.split_per_filter_row)
    tasks = [(k, m, lo, hi)
             for k in range(cfg.hf * cfg.wf)
             for m in range(cfg.m)
             for lo, hi in ranges]

    def run(task):
        k, m, lo, hi = task
        _run_block(shifted_rows[k], filter_rows[k][m], targets[k],
                   m, lo, hi, positions_per_image)

    if workers <= 1:
        for task in tasks:
            run(task)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, tasks))
    return len(tasks), len(tasks)


def stage1_scalar_prods(inp: Tensor4, filters: Tensor4, cfg: ConvConfig,
                        plan: LaunchPlan | None = None, *,
                        device: DeviceModel | None = None,
                        workspace_limit: int = DEFAULT_WORKSPACE_LIMIT,
                        workers: int = 1) -> tuple[PartialSums, RunStats]:
    """Stage 1 alone: all filter-row dot products into a PartialSums buffer.

    For 1x1 filters the single partial plane already equals the layer
    output.  The buffer counts against workspace_limit except in that 1x1
    case, where conv_twostage would not allocate it at all.
    """
    _check_stride1_operands(inp, filters, cfg)
    device = device or DeviceModel()
    plan = plan or plan_launch(cfg, device)
    validate_plan(plan, cfg, device)
    required = workspace_bytes(cfg)
    if required > workspace_limit:
        raise WorkspaceExceeded(required, workspace_limit)
    h_out, w_out = output_dims(cfg)
    partials = PartialSums(np.zeros((cfg.hf * cfg.wf, cfg.n, cfg.m, h_out, w_out),
                                    dtype=np.float32))
    tasks, loads = _stage1_into(list(partials.data), inp, filters, cfg, plan, workers)
    stats = RunStats(stage1_tasks_run=tasks, stage2_invoked=False,
                     filter_row_global_loads=loads, workspace_bytes=required)
    return partials, stats


def stage2_sum(partials: PartialSums, cfg: ConvConfig, *,
               workers: int = 1) -> tuple[Tensor4, RunStats]:
    """Stage 2 alone: sum the k partial planes per output element,
    ascending k, parallelised over (n, m) planes."""
    h_out, w_out = output_dims(cfg)
    expected = (cfg.hf * cfg.wf, cfg.n, cfg.m, h_out, w_out)
    if partials.data.shape != expected:
        raise ShapeMismatch(f"partials dims {partials.data.shape} != {expected} "
                            f"implied by config")
    out = np.zeros((cfg.n, cfg.m, h_out, w_out), dtype=np.float32)
    _stage2_into(out, partials.data, workers)
    return Tensor4(out), RunStats(stage2_invoked=True)


def _stage2_into(out: np.ndarray, partials: np.ndarray, workers: int) -> None:
    n, m = out.shape[:2]
    k = partials.shape[0]
    tasks = [(i, j) for i in range(n) for j in range(m)]

    def run(task):
        i, j = task
        plane = out[i, j]
        for kk in range(k):
            np.add(plane, partials[kk, i, j], out=plane)

    if workers <= 1:
        for task in tasks:
            run(task)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, tasks))


def conv_twostage(inp: Tensor4, filters: Tensor4, cfg: ConvConfig,
                  device: DeviceModel | None = None,
                  workspace_limit: int = DEFAULT_WORKSPACE_LIMIT, *,
                  plan: LaunchPlan | None = None,
                  workers: int = 1) -> tuple[Tensor4, RunStats]:
    """Full two-stage convolution; returns the output and its run stats.

    1x1 filters take the fused path: stage-1 blocks write the output
    tensor directly, no workspace is allocated and stage 2 never runs.
    """
    _check_stride1_operands(inp, filters, cfg)
    device = device or DeviceModel()
    plan = plan or plan_launch(cfg, device)
    validate_plan(plan, cfg, device)
    required = workspace_bytes(cfg)
    if required > workspace_limit:
        raise WorkspaceExceeded(required, workspace_limit)

    h_out, w_out = output_dims(cfg)
    out = np.zeros((cfg.n, cfg.m, h_out, w_out), dtype=np.float32)
    if cfg.hf == 1 and cfg.wf == 1:
        tasks, loads = _stage1_into([out], inp, filters, cfg, plan, workers)
        stats = RunStats(stage1_tasks_run=tasks, stage2_invoked=False,
                         filter_row_global_loads=loads, workspace_bytes=0)
    else:
        partials = np.zeros((cfg.hf * cfg.wf, cfg.n, cfg.m, h_out, w_out),
                            dtype=np.float32)
        tasks, loads = _stage1_into(list(partials), inp, filters, cfg, plan, workers)
        _stage2_into(out, partials, workers)
        stats = RunStats(stage1_tasks_run=tasks, stage2_invoked=True,
                         filter_row_global_loads=loads, workspace_bytes=required)
    return Tensor4(out), stats
