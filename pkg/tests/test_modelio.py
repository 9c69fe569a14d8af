import numpy as np
import pytest

from deepkey import modelio
from deepkey.errors import DataError


class TestRoundtrip:
    def test_values_shapes_order(self, tmp_path):
        rng = np.random.default_rng(0)
        tensors = {
            "a.W": rng.standard_normal((3, 4)),
            "b": rng.standard_normal(7),
            "scalarish": np.array(3.25),
            "big": rng.standard_normal((2, 3, 5)),
        }
        path = tmp_path / "m.bin"
        modelio.save_tensors(path, tensors)
        back = modelio.load_tensors(path)
        assert list(back) == list(tensors)
        for k in tensors:
            assert back[k].dtype == np.float64
            assert back[k].shape == tensors[k].shape
            np.testing.assert_array_equal(back[k], tensors[k])

    def test_byte_exact_rewrite(self, tmp_path):
        rng = np.random.default_rng(1)
        tensors = {"x": rng.standard_normal((5, 5))}
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        modelio.save_tensors(p1, tensors)
        modelio.save_tensors(p2, modelio.load_tensors(p1))
        assert p1.read_bytes() == p2.read_bytes()

    def test_header(self, tmp_path):
        path = tmp_path / "m.bin"
        modelio.save_tensors(path, {"t": np.zeros(2)})
        raw = path.read_bytes()
        assert raw[:4] == b"DKEY"
        assert raw[4:6] == (1).to_bytes(2, "little")

    def test_empty_container(self, tmp_path):
        path = tmp_path / "m.bin"
        modelio.save_tensors(path, {})
        assert modelio.load_tensors(path) == {}


class TestCorruption:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "m.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(DataError):
            modelio.load_tensors(path)

    def test_bad_version(self, tmp_path):
        path = tmp_path / "m.bin"
        modelio.save_tensors(path, {"t": np.zeros(2)})
        raw = bytearray(path.read_bytes())
        raw[4] = 99
        path.write_bytes(bytes(raw))
        with pytest.raises(DataError):
            modelio.load_tensors(path)

    def test_trailing_bytes(self, tmp_path):
        path = tmp_path / "m.bin"
        modelio.save_tensors(path, {"t": np.zeros(2)})
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(DataError):
            modelio.load_tensors(path)
