"""Tensors and layer configs: layout, padding reads, files, and shape math.

Run with: python3 demos/01_tensors_and_configs.py
"""

import tempfile
from pathlib import Path

from convkit import (ConvConfig, load_tensor, make_tensor, output_dims,
                     parse_config_file, read_padded, same_padding, save_tensor)


def main():
    print("== 4-D tensors, NCHW layout ==")
    t = make_tensor((2, 3, 4, 5), "uniform", seed=42)
    print(f"dims        : {t.dims}  (n, c, h, w)")
    print(f"flat index  : (n=1, c=2, y=3, x=4) -> {t.flat_index(1, 2, 3, 4)}")
    print(f"             x varies fastest: (1, 2, 3, 3) -> {t.flat_index(1, 2, 3, 3)}")
    print(f"element     : {t.data[1, 2, 3, 4]:.6f}")

    print()
    print("== virtual zero padding ==")
    print("reads outside the plane cost nothing and return 0:")
    print(f"  read_padded(t, 0, 0, -1, 2) = {read_padded(t, 0, 0, -1, 2)}")
    print(f"  read_padded(t, 0, 0,  2, 2) = {read_padded(t, 0, 0, 2, 2):.6f}")

    print()
    print("== binary tensor files ==")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "t.tensor"
        save_tensor(t, path)
        back = load_tensor(path)
        print(f"wrote {path.stat().st_size} bytes "
              f"(24-byte header + {t.data.nbytes} payload)")
        print(f"round trip bitwise identical: "
              f"{back.data.tobytes() == t.data.tobytes()}")

    print()
    print("== layer configs and output shapes ==")
    cfg = ConvConfig("demo", n=1, c=64, h=13, w=13, m=96, hf=5, wf=5,
                     pad_h=2, pad_w=2)
    print(f"{cfg.name}: {cfg.h}x{cfg.w}x{cfg.c} -> {cfg.m} filters of "
          f"{cfg.hf}x{cfg.wf}, pad {cfg.pad_h}")
    print(f"output dims : {output_dims(cfg)}  (same padding keeps 13x13)")
    print(f"same_padding(5, 5) = {same_padding(5, 5)}")

    strided = ConvConfig("strided", n=1, c=3, h=224, w=224, m=64, hf=11, wf=11,
                         stride=4)
    print(f"{strided.name}: stride {strided.stride} -> {output_dims(strided)}")

    print()
    print("== config files ==")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "layers.csv"
        path.write_text(
            "# name,n,c,h,w,m,hf,wf,stride,pad_h,pad_w\n"
            "a,1,832,7,7,256,1,1,1,0,0\n"
            "b,1,384,13,13,384,3,3,1,1,1   # trailing comment\n")
        for parsed in parse_config_file(path):
            print(f"parsed: {parsed}")


if __name__ == "__main__":
    main()
