import numpy as np
import pytest

from convkit import (CoalescingReport, ConvConfig, DeviceModel, InvalidConfig,
                     InvalidPlan, LaunchPlan, Unsupported, block_position_ranges,
                     coalescing_report, output_dims, plan_launch, preset_configs,
                     theoretical_reuse, validate_plan)
from convkit.execmodel import modeled_channels


def coalescing_oracle(cfg, device, plan):
    """Independent model of stage-1 read coalescing.

    Walks every block (all m filters, no scaling shortcut) and every warp in
    pure Python, collecting the set of cache-line keys each warp touches.
    """
    h_out, w_out = output_dims(cfg)
    ppi = h_out * w_out
    work = cfg.n * ppi
    epl = device.line_bytes // device.element_bytes
    plane = cfg.h * cfg.w
    lpi = cfg.c * plane // epl + 1
    if cfg.c == 1 or (plane * device.element_bytes) % device.line_bytes == 0:
        channels = 1
    else:
        channels = min(cfg.c, 4)

    warps = 0
    numer = 0
    perfect = 0
    split = plan.split_per_filter_row
    for _ in range(cfg.m):
        for k in range(cfg.hf * cfg.wf):
            yf, xf = divmod(k, cfg.wf)
            for i in range(split):
                lo = i * work // split
                hi = min((i + 1) * work // split, lo + plan.threads_per_block)
                for w0 in range(lo, hi, device.warp_width):
                    lanes = []
                    for pos in range(w0, min(w0 + device.warp_width, hi)):
                        img, rem = divmod(pos, ppi)
                        y = rem // w_out + yf - cfg.pad_h
                        x = rem % w_out + xf - cfg.pad_w
                        if 0 <= y < cfg.h and 0 <= x < cfg.w:
                            lanes.append((img, y * cfg.w + x))
                    if not lanes:
                        continue
                    cnt = 0
                    for ch in range(channels):
                        cnt += len({img * lpi + (ch * plane + base) // epl
                                    for img, base in lanes})
                    warps += 1
                    numer += cnt
                    if cnt == channels:
                        perfect += 1
    total = numer / channels
    mean = total / warps if warps else 0.0
    return CoalescingReport(transactions_total=total, warps_total=warps,
                            transactions_per_warp_mean=mean,
                            perfectly_coalesced_warps=perfect)


def small_random_config(rng):
    f = int(rng.choice((1, 2, 3, 5)))
    pad = int(rng.integers(0, 2))
    lo = max(1, f - 2 * pad)
    return ConvConfig("rnd", n=int(rng.integers(1, 4)), c=int(rng.integers(1, 7)),
                      h=int(rng.integers(lo, 13)), w=int(rng.integers(lo, 13)),
                      m=int(rng.integers(1, 4)), hf=f, wf=f,
                      pad_h=pad, pad_w=pad)


# ===========================================================================
# device model
# ===========================================================================

class TestDeviceModel:
    def test_defaults(self):
        d = DeviceModel()
        assert (d.warp_width, d.line_bytes, d.max_threads_per_block,
                d.element_bytes) == (32, 128, 1024, 4)
        assert d.elements_per_line == 32

    def test_rejects_bad_fields(self):
        with pytest.raises(InvalidConfig):
            DeviceModel(warp_width=0)
        with pytest.raises(InvalidConfig):
            DeviceModel(max_threads_per_block=-1)
        with pytest.raises(InvalidConfig) as exc:
            DeviceModel(line_bytes=100, element_bytes=8)
        assert exc.value.field == "line_bytes"


# ===========================================================================
# launch planning
# ===========================================================================

class TestPlanLaunch:
    def test_small_plane_rounds_to_warps(self):
        cfg = next(c for c in preset_configs() if c.name == "1x1-A")
        plan = plan_launch(cfg)
        assert plan.blocks == 256
        assert plan.threads_per_block == 64      # 49 positions -> 2 warps
        assert plan.split_per_filter_row == 1
        assert plan.dot_products_per_thread == 1

    def test_mid_plane(self):
        cfg = next(c for c in preset_configs() if c.name == "1x1-B")
        plan = plan_launch(cfg)
        assert plan.blocks == 1024
        assert plan.threads_per_block == 224     # 196 positions -> 7 warps

    def test_splits_large_workload(self):
        cfg = ConvConfig("t", n=1, c=1, h=40, w=50, m=1, hf=1, wf=1)
        plan = plan_launch(cfg)                  # 2000 positions
        assert plan.split_per_filter_row == 2
        assert plan.threads_per_block == 1024
        assert plan.dot_products_per_thread == 1
        assert plan.blocks == 2

    def test_multi_row_blocks(self):
        cfg = ConvConfig("t", n=1, c=4, h=9, w=9, m=7, hf=3, wf=3, pad_h=1, pad_w=1)
        plan = plan_launch(cfg)
        assert plan.blocks == 7 * 9
        assert plan.threads_per_block == 96      # 81 positions -> 3 warps

    def test_rejects_stride(self):
        cfg = ConvConfig("t", n=1, c=1, h=5, w=5, m=1, hf=3, wf=3, stride=2)
        with pytest.raises(Unsupported):
            plan_launch(cfg)

    def test_generated_plans_validate(self):
        rng = np.random.default_rng(70)
        for _ in range(50):
            cfg = small_random_config(rng)
            plan = plan_launch(cfg)
            validate_plan(plan, cfg)             # must not raise
            h_out, w_out = output_dims(cfg)
            work = cfg.n * h_out * w_out
            assert plan.threads_per_block % 32 == 0
            assert plan.threads_per_block <= 1024
            assert plan.split_per_filter_row * plan.threads_per_block * \
                plan.dot_products_per_thread >= work

    def test_non_warp_multiple_device_limit(self):
        device = DeviceModel(max_threads_per_block=48)
        cfg = ConvConfig("t", n=1, c=1, h=10, w=10, m=1, hf=1, wf=1)
        plan = plan_launch(cfg, device)          # 100 positions, limit 48
        assert plan.threads_per_block == 32      # largest warp multiple <= 48
        validate_plan(plan, cfg, device)


class TestValidatePlan:
    def setup_method(self):
        self.cfg = ConvConfig("t", n=1, c=1, h=8, w=8, m=2, hf=1, wf=1)
        self.good = plan_launch(self.cfg)

    def test_good_plan_passes(self):
        validate_plan(self.good, self.cfg)

    def _invalid(self, **overrides):
        fields = dict(blocks=self.good.blocks,
                      threads_per_block=self.good.threads_per_block,
                      split_per_filter_row=self.good.split_per_filter_row,
                      dot_products_per_thread=self.good.dot_products_per_thread)
        fields.update(overrides)
        with pytest.raises(InvalidPlan):
            validate_plan(LaunchPlan(**fields), self.cfg)

    def test_rejects_bad_split(self):
        self._invalid(split_per_filter_row=0)

    def test_rejects_wrong_block_count(self):
        self._invalid(blocks=3)

    def test_rejects_thread_limits(self):
        self._invalid(blocks=2, threads_per_block=2048)
        self._invalid(blocks=2, threads_per_block=0)

    def test_rejects_non_warp_multiple(self):
        self._invalid(threads_per_block=33)

    def test_rejects_bad_dot_products(self):
        self._invalid(dot_products_per_thread=0)

    def test_rejects_insufficient_coverage(self):
        # 2 blocks x 32 threads x 1 dot product < 2 * 64 needed
        self._invalid(threads_per_block=32)


class TestBlockPositionRanges:
    def test_partitions_whole_range(self):
        rng = np.random.default_rng(71)
        for _ in range(40):
            work = int(rng.integers(1, 5000))
            split = int(rng.integers(1, 12))
            ranges = block_position_ranges(work, split)
            assert len(ranges) == split
            assert ranges[0][0] == 0
            assert ranges[-1][1] == work
            for (a, b), (c, d) in zip(ranges, ranges[1:]):
                assert b == c
            sizes = [hi - lo for lo, hi in ranges]
            assert max(sizes) - min(sizes) <= 1

    def test_exact_split(self):
        assert block_position_ranges(8, 2) == [(0, 4), (4, 8)]


# ===========================================================================
# reuse bounds
# ===========================================================================

class TestTheoreticalReuse:
    def test_1x1(self):
        cfg = next(c for c in preset_configs() if c.name == "1x1-A")
        assert theoretical_reuse(cfg) == (49, 1)

    def test_3x3(self):
        cfg = ConvConfig("t", n=1, c=1, h=13, w=13, m=1, hf=3, wf=3, pad_h=1, pad_w=1)
        assert theoretical_reuse(cfg) == (169, 9)

    def test_5x5(self):
        cfg = next(c for c in preset_configs() if c.name == "5x5-B")
        assert theoretical_reuse(cfg) == (49, 25)

    def test_rejects_stride(self):
        cfg = ConvConfig("t", n=1, c=1, h=5, w=5, m=1, hf=3, wf=3, stride=2)
        with pytest.raises(Unsupported):
            theoretical_reuse(cfg)


# ===========================================================================
# channel modelling
# ===========================================================================

class TestModeledChannels:
    def test_single_channel(self):
        cfg = ConvConfig("t", n=1, c=1, h=7, w=7, m=1, hf=1, wf=1)
        assert modeled_channels(cfg, DeviceModel()) == 1

    def test_line_aligned_plane(self):
        cfg = ConvConfig("t", n=1, c=64, h=32, w=32, m=1, hf=1, wf=1)
        assert modeled_channels(cfg, DeviceModel()) == 1

    def test_unaligned_plane_caps_at_four(self):
        cfg = ConvConfig("t", n=1, c=832, h=7, w=7, m=1, hf=1, wf=1)
        assert modeled_channels(cfg, DeviceModel()) == 4

    def test_unaligned_small_channel_count(self):
        cfg = ConvConfig("t", n=1, c=3, h=7, w=7, m=1, hf=1, wf=1)
        assert modeled_channels(cfg, DeviceModel()) == 3


# ===========================================================================
# coalescing report
# ===========================================================================

class TestCoalescingReport:
    def test_aligned_planes_coalesce_perfectly(self):
        # 32x32 planes: every warp covers exactly one 128-byte line
        cfg = ConvConfig("t", n=2, c=4, h=32, w=32, m=3, hf=1, wf=1)
        rep = coalescing_report(cfg)
        assert rep.warps_total == 192
        assert rep.transactions_total == 192.0
        assert rep.transactions_per_warp_mean == 1.0
        assert rep.perfectly_coalesced_warps == 192

    def test_frozen_hand_case(self):
        # 2x33 plane, 1x3 filter, no padding: derived by hand.
        # h_out=2, w_out=31, one 64-thread block per filter column.
        # warp 0 spans rows (lines {0,1} except k=0 row-0-only reads),
        # warp 1 sits inside row 1 and straddles a line for k >= 1.
        cfg = ConvConfig("t", n=1, c=1, h=2, w=33, m=1, hf=1, wf=3)
        rep = coalescing_report(cfg)
        assert rep.warps_total == 6
        assert rep.transactions_total == 11.0
        assert rep.perfectly_coalesced_warps == 1
        assert rep.transactions_per_warp_mean == pytest.approx(11 / 6)

    def test_all_padding_warps_are_idle(self):
        # width-1 input column: filter columns 0 and 2 read only padding at
        # every output position, so just the centre column contributes warps
        cfg = ConvConfig("t", n=1, c=1, h=64, w=1, m=1, hf=1, wf=3, pad_w=1)
        rep = coalescing_report(cfg)
        oracle = coalescing_oracle(cfg, DeviceModel(), plan_launch(cfg))
        assert rep == oracle
        assert rep.warps_total == 2
        assert rep.transactions_total == 2.0
        assert rep.perfectly_coalesced_warps == 2

    def test_matches_oracle_on_random_configs(self):
        rng = np.random.default_rng(72)
        device = DeviceModel()
        for _ in range(40):
            cfg = small_random_config(rng)
            plan = plan_launch(cfg, device)
            assert coalescing_report(cfg, device, plan) == \
                coalescing_oracle(cfg, device, plan), cfg

    def test_matches_oracle_with_split(self):
        cfg = ConvConfig("t", n=3, c=3, h=20, w=20, m=2, hf=3, wf=3, pad_h=1, pad_w=1)
        plan = plan_launch(cfg)
        assert plan.split_per_filter_row == 2
        assert coalescing_report(cfg, plan=plan) == \
            coalescing_oracle(cfg, DeviceModel(), plan)

    def test_matches_oracle_with_multiple_rounds(self):
        # explicit plan with several dot products per thread: only the first
        # round of each block is simulated, identically on both routes
        cfg = ConvConfig("t", n=2, c=2, h=8, w=8, m=2, hf=1, wf=1)
        plan = LaunchPlan(blocks=2, threads_per_block=32,
                          split_per_filter_row=1, dot_products_per_thread=4)
        validate_plan(plan, cfg)
        assert coalescing_report(cfg, plan=plan) == \
            coalescing_oracle(cfg, DeviceModel(), plan)

    def test_aggregate_bounds(self):
        rng = np.random.default_rng(73)
        for _ in range(20):
            cfg = small_random_config(rng)
            rep = coalescing_report(cfg)
            assert rep.warps_total >= 1
            assert rep.perfectly_coalesced_warps <= rep.warps_total
            assert rep.warps_total <= rep.transactions_total <= 32 * rep.warps_total
            assert rep.transactions_per_warp_mean == \
                rep.transactions_total / rep.warps_total

    def test_scales_linearly_with_filters(self):
        base = ConvConfig("t", n=1, c=3, h=9, w=9, m=1, hf=3, wf=3, pad_h=1, pad_w=1)
        quad = ConvConfig("t", n=1, c=3, h=9, w=9, m=4, hf=3, wf=3, pad_h=1, pad_w=1)
        r1 = coalescing_report(base)
        r4 = coalescing_report(quad)
        assert r4.warps_total == 4 * r1.warps_total
        assert r4.transactions_total == 4 * r1.transactions_total
        assert r4.perfectly_coalesced_warps == 4 * r1.perfectly_coalesced_warps
        assert r4.transactions_per_warp_mean == r1.transactions_per_warp_mean

    def test_rejects_stride(self):
        cfg = ConvConfig("t", n=1, c=1, h=5, w=5, m=1, hf=3, wf=3, stride=2)
        with pytest.raises(Unsupported):
            coalescing_report(cfg)
