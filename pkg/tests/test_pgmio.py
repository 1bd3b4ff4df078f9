import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from recoilsim.errors import ConfigurationError
from recoilsim.pgmio import read_pgm, write_pgm, write_sidecar


@given(hnp.arrays(np.uint16, hnp.array_shapes(min_dims=2, max_dims=2,
                                              min_side=1, max_side=24)))
@settings(max_examples=40, deadline=None)
def test_write_read_round_trip(tmp_path_factory, image):
    path = tmp_path_factory.mktemp("pgm") / "img.pgm"
    write_pgm(path, image)
    back, maxval = read_pgm(path)
    assert maxval == 65535
    assert np.array_equal(back, image)


def test_eight_bit_read(tmp_path):
    path = tmp_path / "tiny.pgm"
    path.write_bytes(b"P5\n3 2\n255\n" + bytes([0, 10, 255, 7, 8, 9]))
    img, maxval = read_pgm(path)
    assert maxval == 255
    assert img.shape == (2, 3)
    assert img[0, 2] == 255


def test_header_comments_skipped(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# made by hand\n2 1\n# another\n255\n" + bytes([1, 2]))
    img, maxval = read_pgm(path)
    assert img.tolist() == [[1, 2]]


def test_sixteen_bit_is_big_endian(tmp_path):
    path = tmp_path / "be.pgm"
    write_pgm(path, np.array([[0x0102]], dtype=np.uint16))
    raw = path.read_bytes()
    assert raw.endswith(b"\x01\x02")


def test_rejects_non_p5(tmp_path):
    path = tmp_path / "ascii.pgm"
    path.write_bytes(b"P2\n2 2\n255\n0 1 2 3\n")
    with pytest.raises(ConfigurationError):
        read_pgm(path)


def test_rejects_truncated_data(tmp_path):
    path = tmp_path / "short.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
    with pytest.raises(ConfigurationError):
        read_pgm(path)


def test_rejects_out_of_range_pixels(tmp_path):
    with pytest.raises(ConfigurationError):
        write_pgm(tmp_path / "bad.pgm", np.array([[70000]], dtype=np.int64))


def test_sidecar_format(tmp_path):
    path = tmp_path / "img.txt"
    write_sidecar(path, {"pitch_m": 2.5e-10, "rows_axis": "z"})
    text = path.read_text()
    assert "pitch_m = 2.5e-10" in text
    assert "rows_axis = z" in text
