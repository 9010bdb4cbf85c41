import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcikit.buffers import BlockBuffer, RingBuffer, block_append_drain, block_flush, ring_append, ring_get
from bcikit.data import MarkerList, data_equal, make_data
from bcikit.errors import ChannelMismatch, SamplingRateMismatch


def stream_chunk(start, n, n_ch=1, dt=1.0, channels=None):
    """Samples ``start..start+n-1``; value = absolute sample index (+ channel offset)."""
    idx = np.arange(start, start + n, dtype=float)
    vals = idx[:, None] + 1000.0 * np.arange(n_ch)[None, :]
    chans = channels or [f"c{i}" for i in range(n_ch)]
    return make_data(vals, [idx * dt, chans], ["time", "channel"], ["ms", "#"])


def test_ring_tail_example():
    buf = RingBuffer(capacity_ms=5.0)
    buf = ring_append(buf, stream_chunk(1, 3))
    buf = ring_append(buf, stream_chunk(4, 4))
    data, _ = ring_get(buf)
    assert data.values[:, 0].tolist() == [3, 4, 5, 6, 7]
    assert data.axes[0].tolist() == [0, 1, 2, 3, 4]
    assert buf.capacity_samples == 5 and buf.total_appended_samples == 7


def test_ring_chunk_larger_than_capacity():
    buf = ring_append(RingBuffer(5.0), stream_chunk(0, 8))
    assert ring_get(buf)[0].values[:, 0].tolist() == [3, 4, 5, 6, 7]


def test_ring_marker_scrolls_out():
    buf = RingBuffer(5.0)
    buf = ring_append(buf, stream_chunk(0, 3), MarkerList(((1.0, "m"),)))
    assert ring_get(buf)[1].entries == ((1.0, "m"),)
    buf = ring_append(buf, stream_chunk(3, 4))
    # window is samples 2..6, the marker sat on sample 1
    assert len(ring_get(buf)[1]) == 0


def test_ring_marker_on_first_retained_sample_is_kept():
    buf = RingBuffer(5.0)
    buf = ring_append(buf, stream_chunk(0, 3), MarkerList(((2.0, "edge"),)))
    buf = ring_append(buf, stream_chunk(3, 4))
    assert ring_get(buf)[1].entries == ((0.0, "edge"),)
    assert buf.pending_markers.entries == ((0.0, "edge"),)


def test_ring_empty_and_read_only():
    d, m = ring_get(RingBuffer(10.0))
    assert d.shape[0] == 0 and len(m) == 0
    buf = ring_append(RingBuffer(10.0), stream_chunk(0, 4), MarkerList(((2.0, "x"),)))
    a, b = ring_get(buf), ring_get(buf)
    assert data_equal(a[0], b[0]) and a[1] == b[1]


def test_ring_exact_capacity_equals_concatenation():
    buf = RingBuffer(6.0)
    for s, n in ((0, 2), (2, 3), (5, 1)):
        buf = ring_append(buf, stream_chunk(s, n))
    assert ring_get(buf)[0].values[:, 0].tolist() == list(range(6))


def test_ring_absolute_times():
    buf = ring_append(RingBuffer(3.0), stream_chunk(10, 5), MarkerList(((13.0, "m"),)))
    d, m = ring_get(buf, absolute=True)
    assert d.axes[0].tolist() == [12.0, 13.0, 14.0]
    assert m.entries == ((13.0, "m"),)
    assert buf.last_time_ms == 14.0


def test_ring_persistence():
    b1 = ring_append(RingBuffer(5.0), stream_chunk(0, 3))
    b2 = ring_append(b1, stream_chunk(3, 3))
    assert ring_get(b1)[0].shape[0] == 3
    assert ring_get(b2)[0].shape[0] == 5


def test_ring_errors():
    buf = ring_append(RingBuffer(5.0), stream_chunk(0, 3, n_ch=2))
    with pytest.raises(ChannelMismatch):
        ring_append(buf, stream_chunk(3, 3, n_ch=2, channels=["x", "y"]))
    with pytest.raises(SamplingRateMismatch):
        ring_append(buf, make_data(np.zeros((2, 2)), [[3.0, 5.0], ["c0", "c1"]],
                                   ["time", "channel"], ["ms", "#"]))


def test_ring_single_sample_chunks_with_hint():
    buf = RingBuffer(3.0, fs_hz=1000.0)
    for i in range(6):
        buf = ring_append(buf, stream_chunk(i, 1))
    assert ring_get(buf)[0].values[:, 0].tolist() == [3, 4, 5]


def test_block_examples():
    buf = BlockBuffer(4)
    buf, out = block_append_drain(buf, stream_chunk(1, 6))
    assert out.values[:, 0].tolist() == [1, 2, 3, 4]
    assert buf.residue_samples == 2
    buf, out = block_append_drain(buf, stream_chunk(7, 3))
    assert out.values[:, 0].tolist() == [5, 6, 7, 8]
    assert buf.residue.values[:, 0].tolist() == [9]
    buf, out = block_append_drain(BlockBuffer(4), stream_chunk(0, 3))
    assert out.shape[0] == 0 and buf.residue_samples == 3


def test_block_channel_mismatch_and_flush():
    buf, _ = block_append_drain(BlockBuffer(4), stream_chunk(0, 3, n_ch=2))
    with pytest.raises(ChannelMismatch):
        block_append_drain(buf, stream_chunk(3, 3, n_ch=2, channels=["p", "q"]))
    buf, rest = block_flush(buf)
    assert rest.shape[0] == 3 and buf.residue_samples == 0
    with pytest.raises(ValueError):
        BlockBuffer(0)


partitions = st.lists(st.integers(1, 12), min_size=1, max_size=15)


@settings(max_examples=150, deadline=None)
@given(parts=partitions, block=st.integers(1, 7))
def test_block_reassembly(parts, block):
    buf = BlockBuffer(block)
    emitted = []
    pos = 0
    for n in parts:
        buf, out = block_append_drain(buf, stream_chunk(pos, n))
        assert out.shape[0] % block == 0
        assert buf.residue_samples < block
        emitted.extend(out.values[:, 0].tolist())
        pos += n
    total = sum(parts)
    full = total // block * block
    assert emitted == list(range(full))
    res = [] if buf.residue is None else buf.residue.values[:, 0].tolist()
    assert res == list(range(full, total))


@settings(max_examples=150, deadline=None)
@given(parts=partitions, cap=st.integers(1, 20),
       marks=st.lists(st.tuples(st.integers(0, 200), st.sampled_from("abc")), max_size=8))
def test_ring_tail_and_markers(parts, cap, marks):
    total = sum(parts)
    marks = [(i, lbl) for i, lbl in marks if i < total]
    buf = RingBuffer(float(cap), fs_hz=1000.0)
    pos = 0
    for n in parts:
        mk = MarkerList(tuple((float(i), lbl) for i, lbl in marks if pos <= i < pos + n))
        buf = ring_append(buf, stream_chunk(pos, n), mk)
        pos += n
    data, mk = ring_get(buf)
    first = max(0, total - cap)
    assert data.values[:, 0].tolist() == list(range(first, total))
    expect = sorted(((float(i - first), lbl) for i, lbl in marks if i >= first),
                    key=lambda e: e[0])
    assert sorted(mk.entries) == sorted(expect)
    assert all(0 <= t < data.shape[0] for t, _ in mk)


@settings(max_examples=60, deadline=None)
@given(a=st.integers(1, 10), b=st.integers(1, 10), cap=st.integers(1, 12))
def test_append_associative(a, b, cap):
    whole = ring_append(RingBuffer(float(cap)), stream_chunk(0, a + b))
    split = ring_append(ring_append(RingBuffer(float(cap)), stream_chunk(0, a)), stream_chunk(a, b))
    assert data_equal(ring_get(whole)[0], ring_get(split)[0])
