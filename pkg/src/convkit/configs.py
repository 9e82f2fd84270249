"""Convolution layer configurations, presets, and the config file parser."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidConfig, ParseError, Unsupported, UnsupportedFilter

#: batch sizes used for batch sweeps
BATCH_SIZES = (1, 8, 16, 32, 64, 128, 256)

_CSV_FIELDS = ("name", "n", "c", "h", "w", "m", "hf", "wf", "stride", "pad_h", "pad_w")


@dataclass(frozen=True)
class ConvConfig:
    """Shape of one convolution layer.

    n      images per batch
    c      input channels (depth)
    h, w   input plane height/width
    m      number of filters (output channels)
    hf, wf filter height/width
    stride spatial stride (same in both axes)
    pad_h, pad_w  zero padding on each side of the plane
    """

    name: str
    n: int
    c: int
    h: int
    w: int
    m: int
    hf: int
    wf: int
    stride: int = 1
    pad_h: int = 0
    pad_w: int = 0

    def __post_init__(self):
        for field in ("n", "c", "h", "w", "m", "hf", "wf", "stride"):
            if getattr(self, field) < 1:
                raise InvalidConfig(field, f"must be >= 1, got {getattr(self, field)}")
        for field in ("pad_h", "pad_w"):
            if getattr(self, field) < 0:
                raise InvalidConfig(field, f"must be >= 0, got {getattr(self, field)}")
        if self.hf > self.h + 2 * self.pad_h:
            raise InvalidConfig("hf", f"filter height {self.hf} exceeds padded input "
                                      f"height {self.h + 2 * self.pad_h}")
        if self.wf > self.w + 2 * self.pad_w:
            raise InvalidConfig("wf", f"filter width {self.wf} exceeds padded input "
                                      f"width {self.w + 2 * self.pad_w}")

    def with_batch(self, n: int) -> "ConvConfig":
        return dataclasses.replace(self, n=n)


def output_dims(cfg: ConvConfig) -> tuple[int, int]:
    """Output plane (h_out, w_out) for a padded, strided convolution."""
    h_out = (cfg.h + 2 * cfg.pad_h - cfg.hf) // cfg.stride + 1
    w_out = (cfg.w + 2 * cfg.pad_w - cfg.wf) // cfg.stride + 1
    return h_out, w_out


def same_padding(hf: int, wf: int) -> tuple[int, int]:
    """Padding that keeps the output plane the size of the input at stride 1.

    Only odd filter sides admit symmetric same-padding; even sides raise
    UnsupportedFilter.
    """
    if hf < 1 or wf < 1:
        raise UnsupportedFilter(f"filter sides must be >= 1, got {hf}x{wf}")
    if hf % 2 == 0 or wf % 2 == 0:
        raise UnsupportedFilter(f"even filter {hf}x{wf} has no symmetric same-padding")
    return (hf - 1) // 2, (wf - 1) // 2


def filter_row_reuse(cfg: ConvConfig) -> int:
    """How many sliding positions reuse one filter row at stride 1.

    Each filter row is dotted against input rows once per output position,
    so a single row is reused h_out*w_out times per image.
    """
    if cfg.stride != 1:
        raise Unsupported(f"row reuse is defined for stride 1, got {cfg.stride}")
    h_out, w_out = output_dims(cfg)
    return h_out * w_out


def input_dims(cfg: ConvConfig) -> tuple[int, int, int, int]:
    return (cfg.n, cfg.c, cfg.h, cfg.w)


def filter_dims(cfg: ConvConfig) -> tuple[int, int, int, int]:
    return (cfg.m, cfg.c, cfg.hf, cfg.wf)


def _preset(name, n, c, h, m, f):
    pad = (f - 1) // 2
    return ConvConfig(name=name, n=n, c=c, h=h, w=h, m=m, hf=f, wf=f,
                      stride=1, pad_h=pad, pad_w=pad)


def preset_configs() -> list[ConvConfig]:
    """Seven bundled layer shapes, all stride 1 with same-padding.

    Names encode filter size and a letter; the shapes cover 1x1, 3x3 and
    5x5 filters at depths/counts typical of inference workloads.
    """
    return [
        _preset("1x1-A", n=1, c=832, h=7, m=256, f=1),
        _preset("1x1-B", n=1, c=256, h=14, m=1024, f=1),
        _preset("1x1-C", n=1, c=64, h=27, m=256, f=1),
        _preset("3x3-A", n=1, c=192, h=7, m=384, f=3),
        _preset("3x3-B", n=1, c=384, h=13, m=384, f=3),
        _preset("5x5-A", n=1, c=48, h=7, m=128, f=5),
        _preset("5x5-B", n=8, c=48, h=7, m=128, f=5),
    ]


def parse_config_file(path) -> list[ConvConfig]:
    """Parse a CSV of configs.

    Schema: ``name,n,c,h,w,m,hf,wf,stride,pad_h,pad_w`` -- one config per
    line, ``#`` starts a comment, blank lines ignored, UTF-8.  Raises
    ParseError (with the 1-based line number) for malformed lines and
    InvalidConfig (with the field name) for well-formed lines that violate
    a config invariant.
    """
    text = Path(path).read_text(encoding="utf-8")
    configs = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != len(_CSV_FIELDS):
            raise ParseError(line_no, f"expected {len(_CSV_FIELDS)} fields, got {len(parts)}")
        name = parts[0]
        if not name:
            raise ParseError(line_no, "empty name")
        values = {}
        for field, part in zip(_CSV_FIELDS[1:], parts[1:]):
            try:
                values[field] = int(part)
            except ValueError:
                raise ParseError(line_no, f"field {field}: not an integer: {part!r}") from None
        configs.append(ConvConfig(name=name, **values))
    return configs
