"""Streaming containers for online processing.

Both buffers are persistent: appending returns a new buffer and leaves the
old one untouched, so a snapshot can be handed to another thread safely.

Marker times given to :func:`ring_append` are in the time frame of the
chunk's time axis. A marker is retained as long as its time is not earlier
than the first retained sample (half-open eviction).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .data import Data, MarkerList, axis_index, make_data
from .errors import ChannelMismatch, SamplingRateMismatch

__all__ = [
    "RingBuffer",
    "BlockBuffer",
    "ring_append",
    "ring_get",
    "block_append_drain",
    "block_flush",
]

# relative tolerance on the sampling interval
_DT_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class RingBuffer:
    """Tail window of a continuous (time x channel) stream.

    Parameters
    ----------
    capacity_ms : float
        Window length. Converted to a sample count on the first append.
    fs_hz : float, optional
        Sampling rate hint, only needed when the very first chunk holds a
        single sample.
    """

    capacity_ms: float
    fs_hz: float | None = None
    _values: np.ndarray | None = None
    _times: np.ndarray | None = None
    _channels: np.ndarray | None = None
    _units: tuple[str, str] = ("ms", "#")
    _capacity: int | None = None
    _dt: float | None = None
    _markers: tuple[tuple[float, str], ...] = ()
    total_appended_samples: int = 0

    @property
    def capacity_samples(self) -> int | None:
        return self._capacity

    @property
    def sample_count(self) -> int:
        return 0 if self._values is None else self._values.shape[0]

    @property
    def last_time_ms(self) -> float | None:
        """Timestamp of the newest stored sample in the stream's frame."""
        if self._times is None or len(self._times) == 0:
            return None
        return float(self._times[-1])

    @property
    def pending_markers(self) -> MarkerList:
        """Retained markers relative to the start of the stored window."""
        if self._times is None or len(self._times) == 0:
            return MarkerList()
        t0 = self._times[0]
        return MarkerList(tuple((t - t0, lbl) for t, lbl in self._markers))


def _chunk_dt(buf: RingBuffer, times: np.ndarray) -> float | None:
    if len(times) >= 2:
        return float(np.median(np.diff(times)))
    if buf._times is not None and len(buf._times) and len(times):
        return float(times[0] - buf._times[-1])
    if buf.fs_hz:
        return 1000.0 / buf.fs_hz
    return None


def ring_append(buffer: RingBuffer, chunk: Data, markers: MarkerList | None = None,
                axis: str = "time") -> RingBuffer:
    """Append ``chunk`` (and its markers) and keep the last capacity worth.

    Raises
    ------
    ChannelMismatch
        If the chunk's channel axis differs from earlier appends.
    SamplingRateMismatch
        If the chunk's sampling interval differs from earlier appends.
    """
    tax = axis_index(chunk, axis)
    values = np.moveaxis(chunk.values, tax, 0)
    if values.ndim != 2:
        raise ChannelMismatch("ring buffer holds time x channel data")
    chans = chunk.axes[1 - tax]
    times = np.asarray(chunk.axes[tax])
    markers = markers if markers is not None else MarkerList()

    if buffer._channels is not None and not np.array_equal(buffer._channels, chans):
        raise ChannelMismatch(
            f"chunk channels {list(chans)} differ from buffer channels {list(buffer._channels)}")

    dt = _chunk_dt(buffer, times)
    if buffer._dt is not None and dt is not None:
        if abs(dt - buffer._dt) > _DT_RTOL * buffer._dt:
            raise SamplingRateMismatch(
                f"sampling interval {dt} ms differs from {buffer._dt} ms")
    if buffer._dt is not None:
        dt = buffer._dt

    capacity = buffer._capacity
    if capacity is None and dt is not None:
        capacity = int(np.floor(buffer.capacity_ms / dt + 1e-9))

    if buffer._values is None:
        old_v = np.empty((0, len(chans)))
        old_t = np.empty(0)
    else:
        old_v, old_t = buffer._values, buffer._times
    new_v = np.concatenate([old_v, values], axis=0)
    new_t = np.concatenate([old_t, times])
    if capacity is not None and new_v.shape[0] > capacity:
        new_v = new_v[new_v.shape[0] - capacity:]
        new_t = new_t[new_t.shape[0] - capacity:]
    new_v = np.ascontiguousarray(new_v)
    new_v.flags.writeable = False
    new_t.flags.writeable = False

    entries = buffer._markers + tuple(
        (float(t), str(lbl)) for t, lbl in markers.entries)
    if len(new_t):
        tol = (dt or 0.0) * 1e-6
        first = new_t[0] - tol
        entries = tuple(sorted((m for m in entries if m[0] >= first), key=lambda m: m[0]))
    else:
        entries = ()

    return replace(
        buffer,
        _values=new_v,
        _times=new_t,
        _channels=np.asarray(chans),
        _units=(chunk.units[tax], chunk.units[1 - tax]),
        _capacity=capacity,
        _dt=dt,
        _markers=entries,
        total_appended_samples=buffer.total_appended_samples + values.shape[0],
    )


def ring_get(buffer: RingBuffer, absolute: bool = False) -> tuple[Data, MarkerList]:
    """Snapshot of the stored window.

    By default the time axis starts at 0 and markers are relative to it. With
    ``absolute=True`` the original timestamps of the stream are kept.
    """
    if buffer._values is None:
        empty = make_data(np.empty((0, 0)), [np.empty(0), np.empty(0, dtype=str)],
                          ["time", "channel"], ["ms", "#"])
        return empty, MarkerList()
    t = buffer._times
    offset = 0.0 if absolute or len(t) == 0 else float(t[0])
    data = make_data(buffer._values, [t - offset, buffer._channels],
                     ["time", "channel"], list(buffer._units))
    mk = MarkerList(tuple((tm - offset, lbl) for tm, lbl in buffer._markers))
    return data, mk


@dataclass(frozen=True, eq=False)
class BlockBuffer:
    """Re-chunks arbitrary appends into multiples of ``block_samples``."""

    block_samples: int
    _residue: Data | None = None

    def __post_init__(self):
        if int(self.block_samples) < 1:
            raise ValueError("block_samples must be positive")

    @property
    def residue(self) -> Data | None:
        return self._residue

    @property
    def residue_samples(self) -> int:
        return 0 if self._residue is None else self._residue.shape[0]


def _concat_time(a: Data | None, b: Data) -> Data:
    if a is None or a.shape[0] == 0:
        return b
    if not np.array_equal(a.axes[1], b.axes[1]):
        raise ChannelMismatch(
            f"chunk channels {list(b.axes[1])} differ from buffered channels {list(a.axes[1])}")
    return make_data(np.concatenate([a.values, b.values]),
                     [np.concatenate([a.axes[0], b.axes[0]]), b.axes[1]],
                     b.names, b.units, b.extra)


def _slice_time(d: Data, start: int, stop: int) -> Data:
    return make_data(d.values[start:stop], [d.axes[0][start:stop], d.axes[1]],
                     d.names, d.units, d.extra)


def block_append_drain(buffer: BlockBuffer, chunk: Data) -> tuple[BlockBuffer, Data]:
    """Append ``chunk`` and emit all complete blocks.

    The emitted sample count is the largest multiple of ``block_samples`` not
    exceeding residue + chunk; the rest is retained in order. Data must be
    ``(time, channel)`` ordered.
    """
    if buffer._residue is not None and not np.array_equal(buffer._residue.axes[1], chunk.axes[1]):
        raise ChannelMismatch(
            f"chunk channels {list(chunk.axes[1])} differ from buffered channels "
            f"{list(buffer._residue.axes[1])}")
    joined = _concat_time(buffer._residue, chunk)
    n = joined.shape[0]
    k = int(buffer.block_samples)
    n_emit = (n // k) * k
    emitted = _slice_time(joined, 0, n_emit)
    residue = _slice_time(joined, n_emit, n)
    return replace(buffer, _residue=residue), emitted


def block_flush(buffer: BlockBuffer) -> tuple[BlockBuffer, Data | None]:
    """Emit whatever residue is left, e.g. at the end of a stream."""
    return replace(buffer, _residue=None), buffer._residue
