import struct

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from crisp.core import Center, Image2D, PickSet, Volume3D
from crisp.io import (HEADER_BYTES, MrcFormatError, StarFormatError, file_size, read_csv, read_mrc,
                      read_mrc_header, read_mrc_stack, read_star, write_csv, write_mrc,
                      write_mrc_array, write_star)


def dump_header(path):
    """Field dump with plain struct, independent of the numpy header layout."""
    raw = open(path, "rb").read(HEADER_BYTES)
    nx, ny, nz, mode = struct.unpack("<4i", raw[:16])
    cella = struct.unpack("<3f", raw[40:52])
    return {
        "nx": nx, "ny": ny, "nz": nz, "mode": mode, "cella": cella,
        "mapcrs": struct.unpack("<3i", raw[64:76]),
        "ispg": struct.unpack("<i", raw[88:92])[0],
        "nsymbt": struct.unpack("<i", raw[92:96])[0],
        "nversion": struct.unpack("<i", raw[108:112])[0],
        "map": raw[208:212], "stamp": raw[212:216],
    }


def craft_mrc(path, data, mode, byteorder="<", stamp=b"\x44\x44\x00\x00"):
    nz, ny, nx = data.shape
    head = bytearray(HEADER_BYTES)
    struct.pack_into(byteorder + "4i", head, 0, nx, ny, nz, mode)
    struct.pack_into(byteorder + "3f", head, 40, float(nx), float(ny), float(nz))
    head[208:212] = b"MAP "
    head[212:216] = stamp
    dt = {0: "i1", 1: "i2", 2: "f4", 4: "c8", 6: "u2"}[mode]
    with open(path, "wb") as fh:
        fh.write(bytes(head))
        fh.write(np.asarray(data).astype(byteorder + dt).tobytes())


def test_image_round_trip_bit_exact(tmp_path, rng):
    img = Image2D(rng.normal(size=(8, 8)), pixel_size=1.25)
    write_mrc(img, tmp_path / "a.mrc")
    back = read_mrc(tmp_path / "a.mrc")
    assert isinstance(back, Image2D)
    assert back.data.tobytes() == img.data.tobytes()
    assert back.pixel_size == pytest.approx(1.25)


def test_volume_round_trip_and_size(tmp_path):
    vol = Volume3D(np.zeros((4, 4, 4)))
    write_mrc(vol, tmp_path / "v.mrc")
    assert file_size(tmp_path / "v.mrc") == 1024 + 256
    back = read_mrc(tmp_path / "v.mrc")
    assert isinstance(back, Volume3D) and back.side == 4


def test_large_image_size_and_header_fields(tmp_path):
    write_mrc(Image2D(np.zeros((512, 512)), 2.0), tmp_path / "big.mrc")
    assert file_size(tmp_path / "big.mrc") == 1024 + 1_048_576
    h = dump_header(tmp_path / "big.mrc")
    assert (h["nx"], h["ny"], h["nz"], h["mode"]) == (512, 512, 1, 2)
    assert h["cella"] == (1024.0, 1024.0, 2.0)
    assert h["mapcrs"] == (1, 2, 3)
    assert h["map"] == b"MAP "
    assert h["stamp"] == b"\x44\x44\x00\x00"
    assert h["nversion"] == 20140 and h["nsymbt"] == 0 and h["ispg"] == 0


def test_x_varies_fastest(tmp_path):
    data = np.arange(6, dtype=np.float32).reshape(2, 3)
    write_mrc(Image2D(data), tmp_path / "o.mrc")
    payload = np.frombuffer(open(tmp_path / "o.mrc", "rb").read()[HEADER_BYTES:], "<f4")
    np.testing.assert_array_equal(payload, [0, 1, 2, 3, 4, 5])


def test_truncated_header(tmp_path):
    (tmp_path / "t.mrc").write_bytes(b"\0" * 100)
    with pytest.raises(MrcFormatError, match="truncated header"):
        read_mrc(tmp_path / "t.mrc")


def test_truncated_data(tmp_path):
    write_mrc(Image2D(np.ones((4, 4))), tmp_path / "d.mrc")
    raw = (tmp_path / "d.mrc").read_bytes()
    (tmp_path / "d.mrc").write_bytes(raw[:-4])
    with pytest.raises(MrcFormatError, match="truncated data"):
        read_mrc(tmp_path / "d.mrc")


def test_unsupported_mode(tmp_path):
    craft_mrc(tmp_path / "c.mrc", np.zeros((1, 2, 2)), mode=4)
    with pytest.raises(MrcFormatError, match="unsupported mode 4"):
        read_mrc(tmp_path / "c.mrc")


@pytest.mark.parametrize("mode", [0, 1, 6])
def test_integer_modes_convert_to_float(tmp_path, mode):
    data = np.array([[[0, 1], [2, 100]]])
    craft_mrc(tmp_path / "i.mrc", data, mode=mode)
    back = read_mrc(tmp_path / "i.mrc")
    assert back.data.dtype == np.float32
    np.testing.assert_array_equal(back.data, data[0])


def test_big_endian_stamp_honored(tmp_path):
    data = np.arange(4, dtype=np.float32).reshape(1, 2, 2)
    craft_mrc(tmp_path / "be.mrc", data, mode=2, byteorder=">", stamp=b"\x11\x11\x00\x00")
    assert read_mrc_header(tmp_path / "be.mrc").byteorder == ">"
    np.testing.assert_array_equal(read_mrc(tmp_path / "be.mrc").data, data[0])


def test_non_cubic_volume_rejected_but_stack_reads(tmp_path):
    write_mrc_array(np.zeros((3, 4, 4)), tmp_path / "s.mrc")
    with pytest.raises(MrcFormatError, match="non-cubic"):
        read_mrc(tmp_path / "s.mrc")
    stack, px = read_mrc_stack(tmp_path / "s.mrc")
    assert stack.shape == (3, 4, 4) and px == 1.0


def test_write_refuses_non_finite(tmp_path):
    with pytest.raises(ValueError):
        write_mrc_array(np.array([[np.nan]]), tmp_path / "n.mrc")


@given(arrays(np.float32, st.tuples(st.integers(1, 6), st.integers(1, 9), st.integers(1, 9)),
              elements=st.floats(-1e6, 1e6, width=32)))
def test_mrc_round_trip_property(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("mrc") / "p.mrc"
    write_mrc_array(data, path)
    assert file_size(path) == 1024 + 4 * data.size
    back, _ = read_mrc_stack(path)
    assert back.tobytes() == np.ascontiguousarray(data).tobytes()


def test_star_examples(tmp_path):
    picks = PickSet([Center(100.5, 200.25, 0.9), Center(3.0, 4.0, 0.1)], 10, 10)
    write_star(picks, "mic_001.mrc", tmp_path / "p.star")
    text = (tmp_path / "p.star").read_text()
    rows = [ln for ln in text.splitlines() if ln.startswith("mic_001.mrc")]
    assert len(rows) == 2
    assert "100.500000" in rows[0] and "200.250000" in rows[0]
    table = read_star(tmp_path / "p.star")
    assert table.micrographs == ["mic_001.mrc", "mic_001.mrc"]
    np.testing.assert_allclose(table.x, [100.5, 3.0])
    np.testing.assert_allclose(table.scores(), [0.9, 0.1])


def test_star_rejects_empty_picks(tmp_path):
    with pytest.raises(ValueError):
        write_star(PickSet((), 1, 1), "m", tmp_path / "e.star")


def test_star_extra_columns_and_missing_coordinates(tmp_path):
    (tmp_path / "x.star").write_text(
        "data_\n\nloop_\n_rlnCoordinateX #1\n_rlnCoordinateY #2\n_rlnConfidence #3\n"
        "1.0 2.0 0.5\n3.0 4.0 0.7\n")
    table = read_star(tmp_path / "x.star")
    np.testing.assert_allclose(table.y, [2.0, 4.0])
    assert table.columns["_rlnConfidence"] == ["0.5", "0.7"]
    (tmp_path / "bad.star").write_text("data_\n\nloop_\n_rlnCoordinateX #1\n_rlnFoo #2\n1 2\n")
    with pytest.raises(StarFormatError, match="missing coordinate columns"):
        read_star(tmp_path / "bad.star")


def test_star_empty_block(tmp_path):
    (tmp_path / "e.star").write_text("data_\n")
    assert len(read_star(tmp_path / "e.star")) == 0


@given(st.lists(st.tuples(st.floats(0, 1e5), st.floats(0, 1e5), st.floats(0, 1e3)),
                min_size=1, max_size=30))
def test_star_round_trip_property(tmp_path_factory, pts):
    path = tmp_path_factory.mktemp("star") / "r.star"
    picks = PickSet([Center(x, y, s) for x, y, s in pts], 5, 5)
    write_star(picks, "m.mrc", path)
    back = read_star(path).to_pickset(5)
    np.testing.assert_allclose(back.xy(), picks.xy(), atol=1e-6, rtol=0)
    np.testing.assert_allclose(back.scores(), picks.scores(), atol=1e-6, rtol=0)


def test_csv_round_trip(tmp_path):
    write_csv(tmp_path / "m.csv", ["a", "b", "c"], [[1, 0.5, True], {"a": 2, "b": 1e-12, "c": False}])
    rows = read_csv(tmp_path / "m.csv")
    assert rows[0] == {"a": "1", "b": "0.5", "c": "true"}
    assert float(rows[1]["b"]) == 1e-12 and rows[1]["c"] == "false"
