"""Signal processing on :class:`~bcikit.data.Data` objects.

All functions are pure. Operations that work along a dimension take an
``axis`` (dimension name) argument defaulting to the standard layout.
"""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .data import Data, MarkerList, axis_index, make_data, sampling_rate, with_replaced
from .errors import (
    EmptyInterval,
    EmptyReference,
    InvalidBand,
    NoChannelsLeft,
    NonIntegerFactor,
    SignalTooShort,
    StateShapeMismatch,
    TooFewSamples,
    UnstableFilter,
    WindowTooLarge,
)

__all__ = [
    "IirCoefficients",
    "FilterState",
    "select_channels",
    "design_bandpass",
    "apply_filter",
    "filtfilt",
    "subsample",
    "segment",
    "remove_baseline",
    "spectrum",
    "spectrogram",
    "epoch_window",
]


@dataclass(frozen=True, eq=False)
class IirCoefficients:
    """Transfer-function coefficients with ``a[0] == 1``.

    ``band_hz``, ``order`` and ``fs_hz`` describe how the filter was
    designed; they are informational only.

    ``sos`` optionally holds the same filter factored into second-order
    sections, one row ``(b0, b1, b2, 1, a1, a2)`` per section. When present
    the filter runs as a cascade of sections, which stays accurate (and
    stable) for narrow bands at high sampling rates where the expanded
    polynomials lose precision. The state vector has the same length either
    way.
    """

    b: np.ndarray
    a: np.ndarray
    band_hz: tuple[float, float] | None = None
    order: int | None = None
    fs_hz: float | None = None
    sos: np.ndarray | None = None

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=np.float64))
        a = np.atleast_1d(np.asarray(self.a, dtype=np.float64))
        if a[0] == 0:
            raise UnstableFilter("a[0] must be non-zero")
        b, a = b / a[0], a / a[0]
        b.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        if self.sos is not None:
            sos = np.array(self.sos, dtype=np.float64).reshape(-1, 6)
            if np.any(sos[:, 3] != 1.0):
                raise UnstableFilter("second-order sections need a0 == 1")
            sos.flags.writeable = False
            object.__setattr__(self, "sos", sos)

    @property
    def n_state(self) -> int:
        if self.sos is not None:
            return 2 * len(self.sos)
        return max(len(self.a), len(self.b)) - 1

    def sections(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """``(b, a)`` pairs in the order they are applied."""
        if self.sos is None:
            return [self.padded()]
        return [(row[:3], row[3:]) for row in self.sos]

    def poles(self) -> np.ndarray:
        if self.sos is not None:
            return np.concatenate([np.roots(a) for _, a in self.sections()])
        return np.roots(self.a) if len(self.a) > 1 else np.empty(0)

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def padded(self) -> tuple[np.ndarray, np.ndarray]:
        n = max(len(self.a), len(self.b))
        b = np.zeros(n)
        a = np.zeros(n)
        b[:len(self.b)] = self.b
        a[:len(self.a)] = self.a
        return b, a

    def frequency_response(self, freqs_hz, fs_hz: float | None = None) -> np.ndarray:
        """Complex response H(e^{jw}) at the given frequencies."""
        fs = fs_hz or self.fs_hz
        if fs is None:
            raise ValueError("sampling rate needed")
        z = np.exp(-2j * np.pi * np.asarray(freqs_hz, dtype=float) / fs)
        h = np.ones_like(z)
        for b, a in (self.sections() if self.sos is not None else [(self.b, self.a)]):
            h = h * np.polyval(b[::-1], z) / np.polyval(a[::-1], z)
        return h


@dataclass(frozen=True, eq=False)
class FilterState:
    """Per-channel delay line, shape ``(channels, n_state)``."""

    z: np.ndarray

    @property
    def channels(self) -> int:
        return self.z.shape[0]


def select_channels(data: Data, patterns, invert: bool = False, axis: str = "channel") -> Data:
    """Keep channels whose name matches any of the glob ``patterns``.

    Matching is case sensitive; order is preserved. With ``invert`` the
    matching channels are dropped instead.
    """
    if isinstance(patterns, str):
        patterns = [patterns]
    ax = axis_index(data, axis)
    names = data.axes[ax]
    hit = np.array([any(fnmatch.fnmatchcase(str(n), p) for p in patterns) for n in names],
                   dtype=bool)
    keep = ~hit if invert else hit
    if not keep.any():
        raise NoChannelsLeft(f"no channel left after selecting {patterns} (invert={invert})")
    values = np.compress(keep, data.values, axis=ax)
    return with_replaced(data, values, axes={ax: names[keep]})


def _butter_prototype(order: int) -> np.ndarray:
    k = np.arange(order)
    return np.exp(1j * np.pi * (2 * k + order + 1) / (2 * order))


def design_bandpass(low_hz: float, high_hz: float, fs_hz: float, order: int) -> IirCoefficients:
    """Butterworth band-pass.

    The analog low-pass prototype of the given order is transformed to a
    band-pass around pre-warped edge frequencies and mapped to the z-plane
    with the bilinear transform. The resulting filter has ``2 * order``
    poles.
    """
    if not (0 < low_hz < high_hz < fs_hz / 2.0):
        raise InvalidBand(f"need 0 < low < high < fs/2, got ({low_hz}, {high_hz}, fs={fs_hz})")
    if int(order) < 1:
        raise InvalidBand("order must be at least 1")
    order = int(order)
    fs2 = 2.0 * fs_hz
    w_lo = fs2 * np.tan(np.pi * low_hz / fs_hz)
    w_hi = fs2 * np.tan(np.pi * high_hz / fs_hz)
    bw = w_hi - w_lo
    w0 = np.sqrt(w_lo * w_hi)

    # low-pass to band-pass: each prototype pole p splits into the roots of
    # s^2 - p*bw*s + w0^2
    p = _butter_prototype(order)
    half = p * bw / 2.0
    root = np.sqrt(half ** 2 - w0 ** 2)
    poles_s = np.concatenate([half + root, half - root])
    gain_s = bw ** order  # order zeros at s=0, order at infinity

    poles_z = (fs2 + poles_s) / (fs2 - poles_s)
    zeros_z = np.concatenate([np.ones(order), -np.ones(order)])
    # zeros at s=0 contribute (fs2 - 0) each; zeros at infinity contribute nothing
    gain_z = np.real(gain_s * fs2 ** order / np.prod(fs2 - poles_s))
    if not np.all(np.abs(poles_z) < 1):
        raise InvalidBand("designed filter is unstable")

    b = gain_z * np.real(np.poly(zeros_z))
    a = np.real(np.poly(poles_z))
    sos = _band_sections(poles_z, gain_z)
    return IirCoefficients(b, a, (float(low_hz), float(high_hz)), order, float(fs_hz), sos)


def _band_sections(poles: np.ndarray, gain: float) -> np.ndarray:
    """Pair band-pass poles into real second-order sections.

    Every section gets one zero at z=1 and one at z=-1. Sections are ordered
    by increasing pole radius and the overall gain goes into the first one.
    """
    tol = 1e-12
    upper = sorted((p for p in poles if p.imag > tol), key=abs)
    real = sorted((p.real for p in poles if abs(p.imag) <= tol), key=abs)
    pairs = [(p, np.conj(p)) for p in upper]
    pairs += [(real[i], real[i + 1]) for i in range(0, len(real), 2)]
    pairs.sort(key=lambda pr: max(abs(pr[0]), abs(pr[1])))
    rows = []
    for k, (p1, p2) in enumerate(pairs):
        a = np.real(np.poly([p1, p2]))
        g = gain if k == 0 else 1.0
        rows.append([g, 0.0, -g, a[0], a[1], a[2]])
    return np.array(rows)


def _time_first(data: Data, axis: str) -> tuple[int, np.ndarray]:
    ax = axis_index(data, axis)
    x = np.moveaxis(data.values, ax, 0)
    return ax, x


def _run_kernel(coeffs: IirCoefficients, x2d: np.ndarray, zi: np.ndarray):
    y = np.ascontiguousarray(x2d, dtype=np.float64)
    zi = np.ascontiguousarray(zi, dtype=np.float64)
    if coeffs.sos is None:
        b, a = coeffs.padded()
        return _kernels.lfilter_df2t(b, a, y, zi)
    return _kernels.sosfilt_df2t(np.asarray(coeffs.sos, dtype=np.float64), y, zi)


def apply_filter(data: Data, coeffs: IirCoefficients, state: FilterState | None = None,
                 axis: str = "time") -> tuple[Data, FilterState]:
    """Causal filtering along ``axis``, independently for every other index.

    Uses the direct form II transposed recursion. Without ``state`` the
    filter starts from rest. The returned state continues the recursion, so
    filtering a signal in consecutive chunks reproduces a single pass.

    Raises
    ------
    StateShapeMismatch
        If ``state`` does not fit the data.
    """
    ax, x = _time_first(data, axis)
    lead = x.shape
    x2 = x.reshape(lead[0], -1)
    n_sig = x2.shape[1]
    n_state = coeffs.n_state
    if state is None:
        zi = np.zeros((n_sig, n_state))
    else:
        zi = np.asarray(state.z, dtype=np.float64)
        if zi.shape != (n_sig, n_state):
            raise StateShapeMismatch(
                f"state has shape {zi.shape}, expected {(n_sig, n_state)}")
    y2, zf = _run_kernel(coeffs, x2, zi)
    y = np.moveaxis(y2.reshape(lead), 0, ax)
    zf.flags.writeable = False
    return with_replaced(data, y), FilterState(zf)


def _steady_state(coeffs: IirCoefficients) -> np.ndarray:
    """Delay-line state of the step response in steady state.

    For a cascade each section sees the step scaled by the DC gain of the
    sections before it.
    """
    if coeffs.sos is None:
        return _steady_state_ba(*coeffs.padded())
    out, scale = [], 1.0
    for b, a in coeffs.sections():
        out.append(scale * _steady_state_ba(b, a))
        scale *= b.sum() / a.sum()
    return np.concatenate(out)


def _steady_state_ba(b: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Solves ``zi = A zi + B`` for the companion form of the DF-II-T
    recursion with unit input."""
    n = len(a) - 1
    if n == 0:
        return np.empty(0)
    companion = np.zeros((n, n))
    companion[:, 0] = -a[1:]
    companion[:-1, 1:] = np.eye(n - 1)
    rhs = b[1:] - a[1:] * b[0]
    return np.linalg.solve(np.eye(n) - companion, rhs)


def filtfilt(data: Data, coeffs: IirCoefficients, axis: str = "time") -> Data:
    """Zero-phase filtering: forward pass, reverse, forward pass, reverse.

    The signal is extended at both ends by odd-symmetric reflection of
    length ``3 * n_state`` and each pass starts from the steady-state
    response to the respective edge sample.

    Raises
    ------
    SignalTooShort
        If the signal is not longer than the padding.
    """
    ax, x = _time_first(data, axis)
    lead = x.shape
    x2 = x.reshape(lead[0], -1)
    n_state = coeffs.n_state
    padlen = 3 * n_state
    if x2.shape[0] <= padlen:
        raise SignalTooShort(
            f"signal has {x2.shape[0]} samples, filtfilt needs more than {padlen}")
    if padlen:
        left = 2 * x2[0] - x2[padlen:0:-1]
        right = 2 * x2[-1] - x2[-2:-padlen - 2:-1]
        ext = np.concatenate([left, x2, right])
    else:
        ext = x2
    zss = _steady_state(coeffs)
    y, _ = _run_kernel(coeffs, ext, np.outer(ext[0], zss))
    y = y[::-1]
    y, _ = _run_kernel(coeffs, y, np.outer(y[0], zss))
    y = y[::-1]
    if padlen:
        y = y[padlen:-padlen]
    return with_replaced(data, np.moveaxis(y.reshape(lead), 0, ax))


def subsample(data: Data, target_fs_hz: float, axis: str = "time",
              fs_hz: float | None = None) -> Data:
    """Keep every k-th sample starting at the first one.

    No anti-aliasing filter is applied; low-pass filter the data first.
    Markers are kept unchanged since they are time based. ``fs_hz`` is
    only needed when the time axis holds fewer than two samples.

    Raises
    ------
    NonIntegerFactor
        If the current rate is not an integer multiple of ``target_fs_hz``.
    """
    fs = fs_hz if fs_hz is not None else sampling_rate(data, axis)
    ratio = fs / float(target_fs_hz)
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-6 * ratio:
        raise NonIntegerFactor(f"{fs} Hz is not an integer multiple of {target_fs_hz} Hz")
    if k == 1:
        return with_replaced(data)
    ax = axis_index(data, axis)
    sl = [slice(None)] * data.ndim
    sl[ax] = slice(None, None, k)
    return with_replaced(data, data.values[tuple(sl)], axes={ax: data.axes[ax][::k]})


def epoch_window(times: np.ndarray, marker_ms: float, start_ms: float, n_samples: int,
                 dt_ms: float) -> int | None:
    """Index of the first sample of an epoch, or None if it does not fit.

    The epoch starts at the first sample whose timestamp is not earlier
    than ``marker_ms + start_ms`` and must lie completely inside ``times``.
    """
    if len(times) == 0:
        return None
    tol = 1e-6 * dt_ms
    t_start = marker_ms + start_ms
    if t_start < times[0] - tol:
        return None
    i0 = int(np.searchsorted(times, t_start - tol, side="left"))
    if i0 + n_samples > len(times):
        return None
    return i0


def segment(data: Data, markers: MarkerList | None, class_defs: dict,
            interval_ms, axis: str = "time", fs_hz: float | None = None) -> Data:
    """Cut epochs around markers.

    Every marker whose label appears in ``class_defs`` produces one epoch of
    ``round((end - start) * fs / 1000)`` samples starting at
    ``marker + start``. Epochs not fully inside the data are skipped. The
    result is ``(class, time, channel)``; the class axis holds the class name
    of each epoch and the time axis is the grid ``start + k / fs`` relative to
    the marker. Marker times and labels of the epochs are stored in
    ``extra["epoch_markers"]``.

    If ``markers`` is None the data's own markers are used.
    """
    start, end = float(interval_ms[0]), float(interval_ms[1])
    if not start < end:
        raise EmptyInterval(f"interval [{start}, {end}) is empty")
    if markers is None:
        markers = data.markers or MarkerList()
    ax = axis_index(data, axis)
    fs = fs_hz if fs_hz is not None else sampling_rate(data, axis)
    dt = 1000.0 / fs
    n = int(round((end - start) * fs / 1000.0))
    times = np.asarray(data.axes[ax])
    x = np.moveaxis(data.values, ax, 0)

    epochs, classes, used = [], [], []
    for t, lbl in markers.entries:
        if lbl not in class_defs:
            continue
        i0 = epoch_window(times, t, start, n, dt)
        if i0 is None:
            continue
        epochs.append(x[i0:i0 + n])
        classes.append(class_defs[lbl])
        used.append((t, lbl))
    rest_shape = x.shape[1:]
    values = np.stack(epochs) if epochs else np.empty((0, n) + rest_shape)
    # canonical grid; rounding removes float noise so intervals compare cleanly
    rel = np.round(start + np.arange(n) * dt, 9)
    other_axes = [data.axes[d] for d in range(data.ndim) if d != ax]
    other_names = [data.names[d] for d in range(data.ndim) if d != ax]
    other_units = [data.units[d] for d in range(data.ndim) if d != ax]
    extra = dict(data.extra)
    extra["epoch_markers"] = [[t, lbl] for t, lbl in used]
    return make_data(values, [np.array(classes, dtype=str), rel] + other_axes,
                     ["class", data.names[ax]] + other_names,
                     ["#", data.units[ax]] + other_units, extra)


def remove_baseline(epo: Data, ref_interval_ms, axis: str = "time") -> Data:
    """Subtract the mean over ``[start, end)`` of the time axis.

    Raises
    ------
    EmptyReference
        If no sample falls into the reference interval.
    """
    ax = axis_index(epo, axis)
    t = epo.axes[ax]
    mask = (t >= ref_interval_ms[0]) & (t < ref_interval_ms[1])
    if not mask.any():
        raise EmptyReference(f"no samples in reference interval {tuple(ref_interval_ms)}")
    base = np.compress(mask, epo.values, axis=ax).mean(axis=ax, keepdims=True)
    return with_replaced(epo, epo.values - base)


def _window(kind: str, n: int) -> np.ndarray:
    if kind == "hann":
        # periodic=False, i.e. symmetric Hann
        return np.hanning(n) if n > 1 else np.ones(n)
    if kind in ("rect", "rectangular", "boxcar", None):
        return np.ones(n)
    raise ValueError(f"unknown window {kind!r}")


def _amplitude(x: np.ndarray, win: np.ndarray) -> np.ndarray:
    """One-sided amplitude spectrum along axis 0."""
    n = x.shape[0]
    shape = (n,) + (1,) * (x.ndim - 1)
    mag = np.abs(np.fft.rfft(x * win.reshape(shape), axis=0))
    scale = np.full(mag.shape[0], 2.0 / n)
    scale[0] = 1.0 / n
    if n % 2 == 0:
        scale[-1] = 1.0 / n
    return mag * scale.reshape((-1,) + (1,) * (x.ndim - 1))


def spectrum(data: Data, window: str = "hann", axis: str = "time",
             fs_hz: float | None = None) -> Data:
    """Amplitude spectrum along the time axis.

    Bins other than DC and Nyquist are scaled by ``2 / N``, DC and Nyquist
    by ``1 / N``. With the rectangular window a sinusoid of amplitude A on a
    bin frequency shows up with height A; the Hann window halves that (its
    coherent gain is 0.5). The time axis is replaced by a ``frequency`` axis
    in Hz.
    """
    ax = axis_index(data, axis)
    n = data.shape[ax]
    if n < 2:
        raise TooFewSamples("spectrum needs at least two samples")
    fs = fs_hz if fs_hz is not None else sampling_rate(data, axis)
    x = np.moveaxis(data.values, ax, 0)
    amp = _amplitude(x, _window(window, n))
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    return with_replaced(data, np.moveaxis(amp, 0, ax), axes={ax: freqs},
                         names={ax: "frequency"}, units={ax: "Hz"}, markers=None)


def spectrogram(data: Data, window_samples: int, overlap_fraction: float = 0.5,
                axis: str = "time", fs_hz: float | None = None) -> Data:
    """Short-time amplitude spectra with a Hann window.

    The hop is ``floor(window * (1 - overlap))`` (at least 1) and there are
    ``1 + (N - window) // hop`` segments. For continuous ``(time, channel)``
    input the output is ``(time, frequency, channel)`` with the time axis
    holding segment centres.
    """
    ax = axis_index(data, axis)
    n = data.shape[ax]
    window_samples = int(window_samples)
    if window_samples > n or window_samples < 2:
        raise WindowTooLarge(f"window of {window_samples} samples for {n} samples")
    if not 0 <= overlap_fraction < 1:
        raise ValueError("overlap must be in [0, 1)")
    fs = fs_hz if fs_hz is not None else sampling_rate(data, axis)
    hop = max(1, int(np.floor(window_samples * (1 - overlap_fraction))))
    n_seg = 1 + (n - window_samples) // hop
    x = np.moveaxis(data.values, ax, 0)
    win = _window("hann", window_samples)
    t = np.asarray(data.axes[ax])
    slices, centres = [], []
    for s in range(n_seg):
        seg = x[s * hop: s * hop + window_samples]
        slices.append(_amplitude(seg, win))
        centres.append(0.5 * (t[s * hop] + t[s * hop + window_samples - 1]))
    out = np.stack(slices)  # segment, frequency, rest...
    freqs = np.fft.rfftfreq(window_samples, 1.0 / fs)
    # put (segment, frequency) where the time axis used to be
    out = np.moveaxis(out, (0, 1), (ax, ax + 1))
    axes_, names_, units_ = [], [], []
    for d in range(data.ndim):
        if d == ax:
            axes_ += [np.array(centres), freqs]
            names_ += [data.names[d], "frequency"]
            units_ += [data.units[d], "Hz"]
        else:
            axes_.append(data.axes[d])
            names_.append(data.names[d])
            units_.append(data.units[d])
    return make_data(out, axes_, names_, units_, data.extra)
