import numpy as np
import pytest

from convkit import (FormatError, InvalidShape, Tensor4, load_tensor, make_tensor,
                     read_padded, save_tensor)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


class TestMakeTensor:
    def test_zeros(self):
        t = make_tensor((2, 3, 4, 5))
        assert t.dims == (2, 3, 4, 5)
        assert t.data.dtype == np.float32
        assert not t.data.any()

    def test_constant(self):
        t = make_tensor((1, 1, 2, 2), "constant", value=3.5)
        assert (t.data == np.float32(3.5)).all()

    def test_uniform_deterministic(self):
        a = make_tensor((2, 3, 5, 7), "uniform", seed=42)
        b = make_tensor((2, 3, 5, 7), "uniform", seed=42)
        c = make_tensor((2, 3, 5, 7), "uniform", seed=43)
        assert a.data.tobytes() == b.data.tobytes()
        assert a.data.tobytes() != c.data.tobytes()

    def test_uniform_range(self):
        t = make_tensor((1, 4, 16, 16), "uniform", seed=7, lo=-2.0, hi=0.5)
        assert float(t.data.min()) >= -2.0
        assert float(t.data.max()) < 0.5

    def test_uniform_requires_seed_and_sane_range(self):
        with pytest.raises(InvalidShape):
            make_tensor((1, 1, 1, 1), "uniform")
        with pytest.raises(InvalidShape):
            make_tensor((1, 1, 1, 1), "uniform", seed=1, lo=1.0, hi=1.0)

    def test_bad_dims(self):
        with pytest.raises(InvalidShape):
            make_tensor((0, 1, 2, 2))
        with pytest.raises(InvalidShape):
            make_tensor((1, 2, 2))
        with pytest.raises(InvalidShape):
            make_tensor((1, 1, -3, 2))

    def test_unknown_fill(self):
        with pytest.raises(InvalidShape):
            make_tensor((1, 1, 1, 1), "sparkles")


class TestIndexing:
    def test_flat_index_closed_form(self):
        t = make_tensor((3, 4, 5, 6))
        n, c, h, w = t.dims
        assert t.flat_index(2, 3, 4, 5) == ((2 * c + 3) * h + 4) * w + 5
        assert t.flat_index(0, 0, 0, 0) == 0
        assert t.flat_index(2, 3, 4, 5) == n * c * h * w - 1

    def test_flat_index_matches_memory_order(self, rng):
        t = make_tensor((2, 3, 4, 5), "uniform", seed=11)
        flat = t.data.reshape(-1)
        for _ in range(200):
            n, c, y, x = (int(rng.integers(0, d)) for d in t.dims)
            assert flat[t.flat_index(n, c, y, x)] == t.data[n, c, y, x]

    def test_coords_round_trip(self, rng):
        t = make_tensor((3, 2, 7, 5))
        total = 3 * 2 * 7 * 5
        for flat in rng.integers(0, total, size=300):
            coords = t.coords(int(flat))
            assert t.flat_index(*coords) == int(flat)


class TestReadPadded:
    def test_in_range(self):
        t = make_tensor((1, 2, 3, 3), "uniform", seed=5)
        assert read_padded(t, 0, 1, 2, 2) == t.data[0, 1, 2, 2]

    def test_out_of_plane_is_zero(self):
        t = make_tensor((1, 1, 3, 3), "constant", value=9.0)
        for y, x in [(-1, 0), (0, -1), (3, 0), (0, 3), (-2, -2), (5, 5)]:
            v = read_padded(t, 0, 0, y, x)
            assert v == np.float32(0.0)

    def test_bad_image_or_channel(self):
        t = make_tensor((2, 3, 4, 4))
        with pytest.raises(IndexError):
            read_padded(t, 2, 0, 0, 0)
        with pytest.raises(IndexError):
            read_padded(t, -1, 0, 0, 0)
        with pytest.raises(IndexError):
            read_padded(t, 0, 3, 0, 0)

    def test_property_against_manual_bounds(self, rng):
        t = make_tensor((2, 3, 6, 4), "uniform", seed=99)
        for _ in range(1000):
            n = int(rng.integers(0, 2))
            c = int(rng.integers(0, 3))
            y = int(rng.integers(-4, 10))
            x = int(rng.integers(-4, 8))
            got = read_padded(t, n, c, y, x)
            if 0 <= y < 6 and 0 <= x < 4:
                assert got == t.data[n, c, y, x]
            else:
                assert got == np.float32(0.0)


class TestFileFormat:
    def test_round_trip_bitwise(self, tmp_path, rng):
        t = make_tensor((2, 3, 5, 4), "uniform", seed=1234)
        # poke in values that only survive a byte-exact round trip
        bits = t.data.view(np.uint32)
        bits[0, 0, 0, 0] = 0x7FC00ABC  # NaN with payload
        bits[1, 2, 4, 3] = 0x80000000  # negative zero
        path = tmp_path / "t.c0nv"
        save_tensor(t, path)
        back = load_tensor(path)
        assert back.dims == t.dims
        assert back.data.tobytes() == t.data.tobytes()

    def test_header_layout(self, tmp_path):
        t = make_tensor((1, 2, 3, 4), "constant", value=1.0)
        path = tmp_path / "t.bin"
        save_tensor(t, path)
        raw = path.read_bytes()
        assert raw[:4] == b"C0NV"
        assert int.from_bytes(raw[4:6], "little") == 1
        dims = [int.from_bytes(raw[6 + 4 * i:10 + 4 * i], "little") for i in range(4)]
        assert dims == [1, 2, 3, 4]
        assert len(raw) == 22 + 4 * 24

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOPE" + bytes(18))
        with pytest.raises(FormatError):
            load_tensor(path)

    def test_bad_version(self, tmp_path):
        t = make_tensor((1, 1, 1, 1))
        path = tmp_path / "v.bin"
        save_tensor(t, path)
        raw = bytearray(path.read_bytes())
        raw[4] = 2
        path.write_bytes(bytes(raw))
        with pytest.raises(FormatError):
            load_tensor(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "short.bin"
        path.write_bytes(b"C0NV\x01\x00")
        with pytest.raises(FormatError):
            load_tensor(path)

    def test_truncated_payload(self, tmp_path):
        t = make_tensor((1, 1, 2, 2), "constant", value=1.0)
        path = tmp_path / "trunc.bin"
        save_tensor(t, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError):
            load_tensor(path)

    def test_trailing_garbage(self, tmp_path):
        t = make_tensor((1, 1, 2, 2))
        path = tmp_path / "extra.bin"
        save_tensor(t, path)
        path.write_bytes(path.read_bytes() + b"\x00\x00\x00\x00")
        with pytest.raises(FormatError):
            load_tensor(path)

    def test_dims_overflow_payload(self, tmp_path):
        # header declares far more elements than the file holds
        import struct
        header = struct.pack("<4sHIIII", b"C0NV", 1, 1000, 1000, 1000, 1000)
        path = tmp_path / "huge.bin"
        path.write_bytes(header + bytes(16))
        with pytest.raises(FormatError):
            load_tensor(path)

    def test_zero_dim_rejected(self, tmp_path):
        import struct
        header = struct.pack("<4sHIIII", b"C0NV", 1, 1, 0, 2, 2)
        path = tmp_path / "zero.bin"
        path.write_bytes(header)
        with pytest.raises(FormatError):
            load_tensor(path)


class TestTensor4:
    def test_wraps_and_converts(self):
        t = Tensor4(np.ones((1, 1, 2, 2), dtype=np.float64))
        assert t.data.dtype == np.float32
        assert t.data.flags.c_contiguous

    def test_rejects_bad_rank(self):
        with pytest.raises(InvalidShape):
            Tensor4(np.ones((2, 2), dtype=np.float32))
