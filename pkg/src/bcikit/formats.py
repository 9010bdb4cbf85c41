"""On-disk formats.

Canonical container
    A directory holding ``meta.json`` and ``data.bin``. ``data.bin`` is the
    raw little-endian float64 tensor in row-major order; ``meta.json`` holds
    ``version`` (1), ``dtype`` (``"<f8"``), ``shape``, ``names``, ``units``,
    ``axes``, ``axis_types``, ``markers`` and ``extra``. Keys are sorted and
    floats written with their shortest round-trip representation, so equal
    inputs give byte-identical files.

Marker file
    UTF-8 lines ``time_ms<TAB>label``.

Layout file
    UTF-8 lines ``name,x,y``; the head is the unit circle, nose towards +y.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .data import Data, MarkerList, make_data
from .errors import (
    BadMarkerLine,
    CorruptContainer,
    IoFailure,
    RaggedRows,
    UnserializableExtra,
    UnsupportedVersion,
)

__all__ = [
    "FORMAT_VERSION",
    "ElectrodeLayout",
    "save_data",
    "load_data",
    "read_markers",
    "write_markers",
    "read_layout",
    "write_layout",
    "default_layout",
    "grid_layout",
    "import_ascii_matrix",
]

FORMAT_VERSION = 1
META = "meta.json"
BIN = "data.bin"


def _axis_to_json(ax: np.ndarray):
    if ax.dtype.kind == "f":
        return "float", [float(v) for v in ax]
    return "str", [str(v) for v in ax]


def _write_atomic(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_data(data: Data, path) -> None:
    """Write ``data`` as a canonical container directory.

    Raises
    ------
    UnserializableExtra
        If ``extra`` holds something JSON cannot represent.
    IoFailure
        On any file system error.
    """
    try:
        extra_json = json.loads(json.dumps(data.extra, allow_nan=False))
    except (TypeError, ValueError) as exc:
        raise UnserializableExtra(f"extra is not JSON serialisable: {exc}") from None
    types, axes = zip(*[_axis_to_json(a) for a in data.axes]) if data.ndim else ((), ())
    meta = {
        "version": FORMAT_VERSION,
        "dtype": "<f8",
        "shape": list(data.shape),
        "names": list(data.names),
        "units": list(data.units),
        "axes": list(axes),
        "axis_types": list(types),
        "markers": None if data.markers is None else [[t, lbl] for t, lbl in data.markers],
        "extra": extra_json,
    }
    meta_bytes = (json.dumps(meta, sort_keys=True, indent=1) + "\n").encode("utf-8")
    payload = np.ascontiguousarray(data.values, dtype="<f8").tobytes(order="C")
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
        _write_atomic(path / BIN, payload)
        _write_atomic(path / META, meta_bytes)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_data(path) -> Data:
    """Read a canonical container directory.

    Raises
    ------
    CorruptContainer
        On missing files, malformed metadata or a byte count that does not
        match the shape.
    UnsupportedVersion
        If the container was written by another format version.
    """
    path = Path(path)
    try:
        meta = json.loads((path / META).read_text(encoding="utf-8"))
        raw = (path / BIN).read_bytes()
    except FileNotFoundError as exc:
        raise CorruptContainer(f"missing file: {exc.filename}") from None
    except (OSError, ValueError) as exc:
        raise CorruptContainer(str(exc)) from None
    if meta.get("version") != FORMAT_VERSION:
        raise UnsupportedVersion(f"container version {meta.get('version')!r}")
    if meta.get("dtype") != "<f8":
        raise CorruptContainer(f"unsupported dtype {meta.get('dtype')!r}")
    try:
        shape = tuple(int(s) for s in meta["shape"])
        expected = int(np.prod(shape, dtype=np.int64)) * 8
        if len(raw) != expected:
            raise CorruptContainer(f"data.bin has {len(raw)} bytes, shape needs {expected}")
        values = np.frombuffer(raw, dtype="<f8").reshape(shape)
        axes = []
        for kind, ax in zip(meta["axis_types"], meta["axes"]):
            axes.append(np.array(ax, dtype=np.float64) if kind == "float"
                        else np.array(ax, dtype=str))
        markers = meta.get("markers")
        if markers is not None:
            markers = MarkerList(tuple((float(t), str(lbl)) for t, lbl in markers))
        return make_data(values, axes, meta["names"], meta["units"], meta.get("extra") or {},
                         markers)
    except CorruptContainer:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptContainer(f"malformed metadata: {exc}") from None


def read_markers(path) -> MarkerList:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise BadMarkerLine(f"{path}:{lineno}: expected 'time_ms<TAB>label'")
            try:
                t = float(parts[0])
            except ValueError:
                raise BadMarkerLine(f"{path}:{lineno}: bad time {parts[0]!r}") from None
            entries.append((t, parts[1]))
    return MarkerList(tuple(entries))


def write_markers(markers: MarkerList, path) -> None:
    lines = "".join(f"{t!r}\t{lbl}\n" for t, lbl in markers)
    Path(path).write_text(lines, encoding="utf-8")


@dataclass(frozen=True)
class ElectrodeLayout:
    """2-D electrode positions; the head is the unit circle, nose at +y."""

    names: tuple[str, ...]
    xy: np.ndarray

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate electrode names")
        xy = np.asarray(self.xy, dtype=float).reshape(len(self.names), 2)
        if np.any(np.sum(xy ** 2, axis=1) > 1.3):
            raise ValueError("electrode positions must satisfy x^2 + y^2 <= 1.3")
        object.__setattr__(self, "xy", xy)

    def position(self, name: str) -> np.ndarray | None:
        try:
            return self.xy[self.names.index(name)]
        except ValueError:
            return None

    def __contains__(self, name: str) -> bool:
        return name in self.names


def read_layout(path) -> ElectrodeLayout:
    names, xy = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        name, x, y = (p.strip() for p in line.split(","))
        names.append(name)
        xy.append((float(x), float(y)))
    return ElectrodeLayout(tuple(names), np.array(xy))


def write_layout(layout: ElectrodeLayout, path) -> None:
    text = "".join(f"{n},{x!r},{y!r}\n" for n, (x, y) in zip(layout.names, layout.xy.tolist()))
    Path(path).write_text(text, encoding="utf-8")


def default_layout() -> ElectrodeLayout:
    """The bundled 64-channel 10-20 (10-10) layout."""
    ref = resources.files("bcikit") / "resources" / "layout_1020_64.csv"
    with resources.as_file(ref) as p:
        return read_layout(p)


def grid_layout(rows: int = 8, cols: int = 8, prefix: str = "ch") -> ElectrodeLayout:
    """Regular lattice inside the unit disc, e.g. for an ECoG grid.

    Channels are numbered row by row starting at 1 in the top-left corner.
    """
    span = 0.7
    xs = np.linspace(-span, span, cols)
    ys = np.linspace(span, -span, rows)
    names, xy = [], []
    for r in range(rows):
        for c in range(cols):
            names.append(f"{prefix}{r * cols + c + 1}")
            xy.append((xs[c], ys[r]))
    return ElectrodeLayout(tuple(names), np.array(xy))


def import_ascii_matrix(signal_path, marker_path, fs_hz: float, channel_names=None,
                        extra: dict | None = None) -> Data:
    """Continuous data from a whitespace separated text matrix.

    One row per sample, one column per channel. The time axis is
    ``i * 1000 / fs`` ms. ``marker_path`` may be None.

    Raises
    ------
    RaggedRows
        If rows have different numbers of columns.
    BadMarkerLine
    """
    rows = []
    width = None
    with open(signal_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise RaggedRows(f"{signal_path}:{lineno}: {len(parts)} values, expected {width}")
            rows.append([float(p) for p in parts])
    values = np.array(rows, dtype=np.float64).reshape(len(rows), width or 0)
    if channel_names is None:
        channel_names = [f"ch{i + 1}" for i in range(values.shape[1])]
    markers = read_markers(marker_path) if marker_path is not None else MarkerList()
    t = np.arange(values.shape[0]) * (1000.0 / fs_hz)
    return make_data(values, [t, list(channel_names)], ["time", "channel"], ["ms", "#"],
                     extra, markers)
