"""Readers and writers for MRC rasters, STAR coordinate tables and CSV reports.

MRC files follow the MRC2014 layout: a 1024-byte header followed by the raw
voxel payload, x varying fastest.  Only mode 2 (float32) is written, always
little-endian; modes 0, 1, 2, 6 and 12 are accepted on read and converted to
float32.  Header fields written (byte offset, meaning):

====== ===============================================================
0      nx, ny, nz (int32 x3)
12     mode (int32, always 2)
16     nxstart, nystart, nzstart (int32 x3, zero)
28     mx, my, mz (int32 x3, equal to nx, ny, nz)
40     cell lengths in Å (float32 x3, n * pixel size)
52     cell angles (float32 x3, 90)
64     mapc, mapr, maps (int32 x3, 1 2 3)
76     dmin, dmax, dmean (float32 x3)
88     ispg (int32, 0 for images and stacks, 1 for volumes)
92     nsymbt (int32, zero: no extended header)
104    exttyp (4 bytes, blank)
108    nversion (int32, 20140)
196    origin (float32 x3, zero)
208    "MAP "
212    machine stamp (0x44 0x44 0x00 0x00 = little-endian)
216    rms (float32)
220    nlabl (int32, zero)
====== ===============================================================

STAR tables use the RELION coordinate labels ``_rlnMicrographName``,
``_rlnCoordinateX``, ``_rlnCoordinateY`` and ``_rlnAutopickFigureOfMerit``.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .core import Center, CrispError, Image2D, PickSet, Volume3D

HEADER_BYTES = 1024

_HEADER_FIELDS = [
    ("nx", "i4"), ("ny", "i4"), ("nz", "i4"), ("mode", "i4"),
    ("nxstart", "i4"), ("nystart", "i4"), ("nzstart", "i4"),
    ("mx", "i4"), ("my", "i4"), ("mz", "i4"),
    ("cella", "f4", 3), ("cellb", "f4", 3),
    ("mapc", "i4"), ("mapr", "i4"), ("maps", "i4"),
    ("dmin", "f4"), ("dmax", "f4"), ("dmean", "f4"),
    ("ispg", "i4"), ("nsymbt", "i4"),
    ("extra1", "V8"), ("exttyp", "S4"), ("nversion", "i4"), ("extra2", "V84"),
    ("origin", "f4", 3), ("map", "S4"), ("machst", "u1", 4),
    ("rms", "f4"), ("nlabl", "i4"), ("label", "S80", 10),
]


def _header_dtype(byteorder):
    return np.dtype([(f[0], byteorder + f[1] if f[1][0] in "if" else f[1], *f[2:]) for f in _HEADER_FIELDS])


HEADER_DTYPE = _header_dtype("<")
assert HEADER_DTYPE.itemsize == HEADER_BYTES

_MODE_DTYPES = {0: "i1", 1: "i2", 2: "f4", 6: "u2", 12: "f2"}


class MrcFormatError(CrispError):
    """The file is not a readable MRC file."""


class StarFormatError(CrispError):
    """The STAR table is malformed."""


@dataclass(frozen=True)
class MrcHeader:
    nx: int
    ny: int
    nz: int
    mode: int
    cell: tuple[float, float, float]
    machine_stamp: bytes
    byteorder: str
    ext_bytes: int = 0

    @property
    def pixel_size(self) -> float:
        if self.nx > 0 and self.cell[0] > 0:
            return float(self.cell[0]) / self.nx
        return 1.0


def _parse_header(raw: bytes) -> MrcHeader:
    if len(raw) < HEADER_BYTES:
        raise MrcFormatError(f"truncated header: {len(raw)} of {HEADER_BYTES} bytes")
    stamp = raw[212:216]
    byteorder = ">" if stamp[0] == 0x11 else "<"
    hdr = np.frombuffer(raw[:HEADER_BYTES], dtype=_header_dtype(byteorder))[0]
    nx, ny, nz = int(hdr["nx"]), int(hdr["ny"]), int(hdr["nz"])
    if min(nx, ny, nz) < 1:
        # some writers leave the stamp empty; retry with the other byte order
        other = "<" if byteorder == ">" else ">"
        alt = np.frombuffer(raw[:HEADER_BYTES], dtype=_header_dtype(other))[0]
        if min(int(alt["nx"]), int(alt["ny"]), int(alt["nz"])) >= 1:
            hdr, byteorder = alt, other
            nx, ny, nz = int(hdr["nx"]), int(hdr["ny"]), int(hdr["nz"])
        else:
            raise MrcFormatError(f"invalid dimensions nx={nx} ny={ny} nz={nz}")
    return MrcHeader(
        nx=nx, ny=ny, nz=nz, mode=int(hdr["mode"]),
        cell=tuple(float(c) for c in hdr["cella"]),
        machine_stamp=bytes(stamp), byteorder=byteorder,
        ext_bytes=max(int(hdr["nsymbt"]), 0),
    )


def read_mrc_header(path) -> MrcHeader:
    with open(path, "rb") as fh:
        return _parse_header(fh.read(HEADER_BYTES))


def read_mrc_array(path) -> tuple[np.ndarray, MrcHeader]:
    """Read the payload as a float32 array of shape (nz, ny, nx)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    header = _parse_header(raw[:HEADER_BYTES])
    if header.mode not in _MODE_DTYPES:
        raise MrcFormatError(f"unsupported mode {header.mode}")
    dtype = np.dtype(header.byteorder + _MODE_DTYPES[header.mode])
    count = header.nx * header.ny * header.nz
    start = HEADER_BYTES + header.ext_bytes
    need = start + count * dtype.itemsize
    if len(raw) < need:
        raise MrcFormatError(f"truncated data: {len(raw)} of {need} bytes")
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=start)
    data = data.astype(np.float32).reshape(header.nz, header.ny, header.nx)
    return data, header


def read_mrc(path) -> Image2D | Volume3D:
    """Read a 2D image (nz == 1) or a cubic volume (nx == ny == nz)."""
    data, header = read_mrc_array(path)
    if header.nz == 1:
        return Image2D(data[0], header.pixel_size)
    if header.nx == header.ny == header.nz:
        return Volume3D(data, header.pixel_size)
    raise MrcFormatError(
        f"non-cubic 3D volume {header.nx}x{header.ny}x{header.nz}; use read_mrc_stack for stacks"
    )


def read_mrc_stack(path) -> tuple[np.ndarray, float]:
    """Read any MRC as a (nz, ny, nx) float32 stack and its pixel size."""
    data, header = read_mrc_array(path)
    return data, header.pixel_size


def _build_header(data3: np.ndarray, pixel_size: float, ispg: int) -> bytes:
    nz, ny, nx = data3.shape
    hdr = np.zeros((), dtype=HEADER_DTYPE)
    hdr["nx"], hdr["ny"], hdr["nz"] = nx, ny, nz
    hdr["mode"] = 2
    hdr["mx"], hdr["my"], hdr["mz"] = nx, ny, nz
    hdr["cella"] = (nx * pixel_size, ny * pixel_size, nz * pixel_size)
    hdr["cellb"] = (90.0, 90.0, 90.0)
    hdr["mapc"], hdr["mapr"], hdr["maps"] = 1, 2, 3
    if data3.size:
        hdr["dmin"], hdr["dmax"] = data3.min(), data3.max()
        hdr["dmean"] = data3.mean(dtype=np.float64)
        hdr["rms"] = data3.std(dtype=np.float64)
    hdr["ispg"] = ispg
    hdr["exttyp"] = b"    "
    hdr["nversion"] = 20140
    hdr["map"] = b"MAP "
    hdr["machst"] = (0x44, 0x44, 0x00, 0x00)
    return hdr.tobytes()


def write_mrc_array(data, path, pixel_size=1.0, ispg=0):
    """Write a 2D or 3D array as a mode-2 little-endian MRC file."""
    arr = np.asarray(data, dtype="<f4")
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError(f"MRC payload must be 2D or 3D, got {arr.ndim}D")
    if not np.all(np.isfinite(arr)):
        raise ValueError("refusing to write non-finite values")
    arr = np.ascontiguousarray(arr)
    with open(path, "wb") as fh:
        fh.write(_build_header(arr, float(pixel_size), ispg))
        fh.write(arr.tobytes())


def write_mrc(obj, path):
    """Write an Image2D or Volume3D."""
    if isinstance(obj, Volume3D):
        write_mrc_array(obj.data, path, obj.pixel_size, ispg=1)
    elif isinstance(obj, Image2D):
        write_mrc_array(obj.data, path, obj.pixel_size, ispg=0)
    else:
        raise TypeError(f"expected Image2D or Volume3D, got {type(obj).__name__}")


# -- STAR ---------------------------------------------------------------------

STAR_NAME = "_rlnMicrographName"
STAR_X = "_rlnCoordinateX"
STAR_Y = "_rlnCoordinateY"
STAR_SCORE = "_rlnAutopickFigureOfMerit"


@dataclass
class StarCoordinateTable:
    micrographs: list[str] = field(default_factory=list)
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    y: np.ndarray = field(default_factory=lambda: np.zeros(0))
    columns: dict[str, list[str]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.x)

    def scores(self) -> np.ndarray:
        if STAR_SCORE in self.columns:
            return np.array([float(v) for v in self.columns[STAR_SCORE]])
        return np.ones(len(self))

    def to_pickset(self, box_width=1.0, box_height=None) -> PickSet:
        centers = [Center(float(x), float(y), max(float(s), 0.0))
                   for x, y, s in zip(self.x, self.y, self.scores())]
        return PickSet(centers, float(box_width), float(box_width if box_height is None else box_height))


def write_star(picks: PickSet, micrograph_name: str, path):
    if len(picks) == 0:
        raise ValueError("refusing to write an empty pick set")
    name = micrograph_name or "micrograph"
    if any(ch.isspace() for ch in name):
        raise ValueError("micrograph names may not contain whitespace")
    lines = [
        "# particle coordinates",
        "",
        "data_",
        "",
        "loop_",
        f"{STAR_NAME} #1",
        f"{STAR_X} #2",
        f"{STAR_Y} #3",
        f"{STAR_SCORE} #4",
    ]
    for c in picks.centers:
        lines.append(f"{name} {c.x:.6f} {c.y:.6f} {c.score:.6f}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _star_loops(text):
    """Yield (labels, rows) for every loop in the file."""
    labels, rows, in_loop = [], [], False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip() if raw.lstrip().startswith("_") else raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("data_") or line == "loop_":
            if in_loop:
                yield labels, rows
            labels, rows, in_loop = [], [], line == "loop_"
            continue
        if not in_loop:
            continue
        if line.startswith("_"):
            if rows:
                # a label after rows means a stray key/value pair; close the loop
                yield labels, rows
                labels, rows, in_loop = [], [], False
                continue
            labels.append(line.split()[0])
        else:
            rows.append(line.split())
    if in_loop:
        yield labels, rows


def read_star(path) -> StarCoordinateTable:
    with open(path) as fh:
        text = fh.read()
    saw_loop = False
    for labels, rows in _star_loops(text):
        saw_loop = True
        if STAR_X not in labels or STAR_Y not in labels:
            continue
        for i, row in enumerate(rows):
            if len(row) != len(labels):
                raise StarFormatError(f"row {i} has {len(row)} fields, expected {len(labels)}")
        cols = {lab: [r[j] for r in rows] for j, lab in enumerate(labels)}
        try:
            x = np.array([float(v) for v in cols.pop(STAR_X)], dtype=np.float64)
            y = np.array([float(v) for v in cols.pop(STAR_Y)], dtype=np.float64)
        except ValueError as exc:
            raise StarFormatError(f"non-numeric coordinate: {exc}") from None
        if np.any(x < 0) or np.any(y < 0):
            raise StarFormatError("negative coordinates")
        names = cols.pop(STAR_NAME, [""] * len(x))
        return StarCoordinateTable(list(names), x, y, cols)
    if saw_loop:
        raise StarFormatError("missing coordinate columns")
    return StarCoordinateTable()


# -- CSV ----------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".10g")
    return str(value)


def write_csv(path, header, rows):
    """Write rows (sequences or dicts keyed by ``header``) with '.' decimals."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row[h] for h in header]
            writer.writerow([_fmt(v) for v in row])


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def file_size(path) -> int:
    return os.path.getsize(path)
