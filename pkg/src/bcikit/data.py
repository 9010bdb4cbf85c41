"""The labeled n-dimensional container used throughout the toolbox.

A :class:`Data` object bundles a float64 array with, for every dimension, a
name, a unit and a coordinate array. Continuous recordings additionally carry
a :class:`MarkerList`. Arbitrary additional attributes live in ``extra`` and
are copied verbatim by every operation.

Conventions for the dimension order:

* continuous data: ``(time, channel)``
* epoched data: ``(class, time, channel)``

Timestamps are float milliseconds, channel and class axes hold strings and use
``"#"`` as unit.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import AmbiguousAxis, AxisNotFound, DimensionMismatch

__all__ = [
    "Data",
    "MarkerList",
    "make_data",
    "axis_index",
    "data_equal",
    "with_replaced",
    "sampling_rate",
]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _is_frozen(arr: Any) -> bool:
    return isinstance(arr, np.ndarray) and not arr.flags.writeable and arr.base is None


def _copy_extra(value: Any) -> Any:
    """Deep copy, fast for the JSON-like values ``extra`` normally holds."""
    if isinstance(value, dict):
        return {k: _copy_extra(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_copy_extra(v) for v in value]
    if value is None or isinstance(value, (str, int, float, bool, tuple)):
        return value if not isinstance(value, tuple) else tuple(_copy_extra(v) for v in value)
    return copy.deepcopy(value)


def _as_axis(ax: Any) -> np.ndarray:
    if _is_frozen(ax) and ax.ndim == 1 and ax.dtype.kind in "fU":
        return ax
    arr = np.array(ax)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.dtype.kind in "biuf":
        arr = arr.astype(np.float64)
    elif arr.dtype.kind in "US" or arr.size == 0:
        arr = arr.astype(str)
    else:
        arr = np.array([str(a) for a in arr], dtype=str)
    return _frozen(arr)


@dataclass(frozen=True)
class MarkerList:
    """Time-stamped labels, sorted by time.

    Sorting is stable, so markers sharing a timestamp keep their insertion
    order.
    """

    entries: tuple[tuple[float, str], ...] = ()

    def __post_init__(self):
        items = [(float(t), str(lbl)) for t, lbl in self.entries]
        items.sort(key=lambda e: e[0])
        object.__setattr__(self, "entries", tuple(items))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.entries], dtype=np.float64)

    @property
    def labels(self) -> list[str]:
        return [lbl for _, lbl in self.entries]

    def shifted(self, offset_ms: float) -> "MarkerList":
        return MarkerList(tuple((t + offset_ms, lbl) for t, lbl in self.entries))

    def between(self, start_ms: float, stop_ms: float) -> "MarkerList":
        """Markers with ``start_ms <= t < stop_ms``."""
        return MarkerList(tuple((t, lbl) for t, lbl in self.entries
                                if start_ms <= t < stop_ms))

    def __add__(self, other: "MarkerList") -> "MarkerList":
        return MarkerList(self.entries + tuple(other.entries))


@dataclass(frozen=True, eq=False)
class Data:
    """Labeled tensor.

    Instances are immutable: the value array and the coordinate arrays are
    marked read-only. Build them with :func:`make_data`, derive new ones with
    :func:`with_replaced`.
    """

    values: np.ndarray
    axes: tuple[np.ndarray, ...]
    names: tuple[str, ...]
    units: tuple[str, ...]
    extra: dict = field(default_factory=dict)
    markers: MarkerList | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def axis(self, name: str) -> np.ndarray:
        return self.axes[axis_index(self, name)]

    def __repr__(self) -> str:
        dims = ", ".join(f"{n}={s}" for n, s in zip(self.names, self.shape))
        return f"Data({dims})"


def make_data(values, axes: Sequence, names: Sequence[str], units: Sequence[str],
              extra: dict | None = None, markers: MarkerList | Iterable | None = None) -> Data:
    """Build and validate a :class:`Data` object.

    The value array is converted to float64 and copied, unless it already is
    a read-only array owning its memory (as produced by this function), in
    which case it is shared. ``extra`` is deep-copied.

    Raises
    ------
    DimensionMismatch
        If the number of axes, names or units differs from the tensor rank,
        or an axis length differs from the corresponding dimension.
    """
    if (_is_frozen(values) and values.dtype == np.float64
            and values.flags.c_contiguous):
        arr = values  # already immutable, safe to share
    else:
        arr = np.array(values, dtype=np.float64, order="C", copy=True)
    axes = tuple(_as_axis(a) for a in axes)
    names = tuple(str(n) for n in names)
    units = tuple(str(u) for u in units)
    if not (len(axes) == len(names) == len(units) == arr.ndim):
        raise DimensionMismatch(
            f"tensor has rank {arr.ndim} but got {len(axes)} axes, "
            f"{len(names)} names and {len(units)} units")
    for d, ax in enumerate(axes):
        if len(ax) != arr.shape[d]:
            raise DimensionMismatch(
                f"axis {names[d]!r} has {len(ax)} entries, dimension has {arr.shape[d]}")
        if names[d] == "time" and ax.dtype.kind == "f" and len(ax) > 1:
            if not np.all(np.diff(ax) > 0):
                raise DimensionMismatch("time axis must be strictly increasing")
    if markers is not None and not isinstance(markers, MarkerList):
        markers = MarkerList(tuple(markers))
    return Data(_frozen(arr), axes, names, units,
                _copy_extra(extra) if extra else {}, markers)


def axis_index(data: Data, name: str) -> int:
    """Index of the dimension called ``name``."""
    hits = [i for i, n in enumerate(data.names) if n == name]
    if not hits:
        raise AxisNotFound(f"no axis named {name!r} in {data.names}")
    if len(hits) > 1:
        raise AmbiguousAxis(f"axis name {name!r} occurs {len(hits)} times")
    return hits[0]


def _arrays_identical(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape != b.shape or a.dtype.kind != b.dtype.kind:
        return False
    if a.dtype.kind == "f":
        # bitwise, so that NaN payloads and signed zeros count
        return a.tobytes() == b.tobytes()
    return bool(np.array_equal(a, b))


def data_equal(a: Data, b: Data) -> bool:
    """Exact equality of values, metadata, markers and ``extra``."""
    if a.values.shape != b.values.shape:
        return False
    if a.values.tobytes() != b.values.tobytes():
        return False
    if a.names != b.names or a.units != b.units:
        return False
    if not all(_arrays_identical(x, y) for x, y in zip(a.axes, b.axes)):
        return False
    if (a.markers is None) != (b.markers is None):
        return False
    if a.markers is not None and a.markers.entries != b.markers.entries:
        return False
    try:
        return json.dumps(a.extra, sort_keys=True) == json.dumps(b.extra, sort_keys=True)
    except TypeError:
        return a.extra == b.extra


_KEEP = object()


def with_replaced(data: Data, values=None, axes: dict | None = None,
                  names: dict | None = None, units: dict | None = None,
                  markers=_KEEP, extra: dict | None = None) -> Data:
    """Copy ``data`` replacing selected parts.

    ``axes``, ``names`` and ``units`` map a dimension index to its new
    coordinate array, name or unit. Dimensions not mentioned keep their
    metadata. When the rank changes, every dimension must be given a new
    axis (``names`` and ``units`` still default to the old entry at that
    index). ``extra`` entries are merged on top of a deep copy of the
    original map, never replacing it.
    """
    new_values = data.values if values is None else values
    new_values = np.asarray(new_values)
    axes = axes or {}
    names = names or {}
    units = units or {}
    ndim = new_values.ndim
    new_axes, new_names, new_units = [], [], []
    for d in range(ndim):
        if d >= data.ndim and not (d in axes and d in names and d in units):
            raise DimensionMismatch(f"dimension {d} is new and needs axis, name and unit")
        new_axes.append(axes[d] if d in axes else data.axes[d])
        new_names.append(names[d] if d in names else data.names[d])
        new_units.append(units[d] if d in units else data.units[d])
    merged = dict(data.extra)
    if extra:
        merged.update(extra)
    return make_data(new_values, new_axes, new_names, new_units, merged,
                     data.markers if markers is _KEEP else markers)


def sampling_rate(data: Data, axis: str = "time") -> float:
    """Sampling rate in Hz derived from the spacing of the time axis."""
    t = data.axis(axis)
    if len(t) < 2:
        raise ValueError("need at least two samples to derive the sampling rate")
    return 1000.0 / float(np.median(np.diff(t)))
