"""Synthetic recordings with known ground truth.

``make_p300_recording``
    A 6x6 row/column speller session. Every intensification evokes a small
    visual response; intensifications of the attended row or column add a
    P300-like positive deflection around 300 ms.

``make_oscillatory_recording``
    Two-class motor-imagery-like data: two band-limited sources whose power
    depends on the class, plus class-independent background sources, mixed
    into the channels by a random matrix.

Marker conventions (shared with :mod:`bcikit.online`):

* speller stimuli are labelled ``R1``..``R6`` / ``C1``..``C6``; in training
  recordings a ``:T`` (target) or ``:N`` (non-target) suffix is appended;
* the spelled text is stored in ``extra["text"]``.
"""

from __future__ import annotations

import numpy as np

from .data import Data, MarkerList, make_data
from .sigproc import apply_filter, design_bandpass

__all__ = [
    "SPELLER_MATRIX",
    "SPELLER_CODES",
    "P300_CHANNELS",
    "make_p300_recording",
    "make_oscillatory_recording",
    "shuffle_speller_codes",
]

SPELLER_MATRIX = "ABCDEFGHIJKLMNOPQRSTUVWXYZ123456789_"
SPELLER_CODES = tuple([f"R{i}" for i in range(1, 7)] + [f"C{i}" for i in range(1, 7)])
P300_CHANNELS = ("Fz", "Cz", "Pz", "Oz", "C3", "C4", "P3", "P4")
# relative P300 amplitude per channel (parietal maximum)
_P300_PATTERN = np.array([0.4, 0.8, 1.0, 0.5, 0.6, 0.6, 0.8, 0.8])
_VISUAL_PATTERN = np.array([0.1, 0.2, 0.4, 1.0, 0.2, 0.2, 0.5, 0.5])


def _gauss(t, mu, sigma):
    return np.exp(-0.5 * ((t - mu) / sigma) ** 2)


def _contains(char: str, code: str, matrix: str) -> bool:
    idx = matrix.index(char)
    row, col = divmod(idx, 6)
    return code == f"R{row + 1}" if code[0] == "R" else code == f"C{col + 1}"


def make_p300_recording(text: str, train: bool = True, fs_hz: float = 240.0,
                        repetitions: int = 15, isi_ms: float = 175.0,
                        p300_amplitude: float = 2.0, noise_std: float = 1.0,
                        pause_ms: float = 2500.0, seed: int = 0,
                        matrix: str = SPELLER_MATRIX) -> Data:
    """Continuous 8-channel speller recording for ``text``.

    ``p300_amplitude`` is in units of the per-sample noise standard
    deviation. Stimulus onsets fall on sample boundaries.
    """
    rng = np.random.default_rng(seed)
    dt = 1000.0 / fs_hz
    isi = int(round(isi_ms / dt))
    pause = int(round(pause_ms / dt))
    per_char = repetitions * 12 * isi
    n = pause + len(text) * (per_char + pause) + int(round(800 / dt))
    n_ch = len(P300_CHANNELS)

    tk = np.arange(int(round(800 / dt))) * dt
    p300 = _gauss(tk, 300.0, 60.0)
    visual = _gauss(tk, 120.0, 25.0) - 0.6 * _gauss(tk, 200.0, 30.0)

    target_train = np.zeros(n)
    stim_train = np.zeros(n)
    markers = []
    pos = pause
    for char in text:
        for _ in range(repetitions):
            for code in rng.permutation(SPELLER_CODES):
                is_target = _contains(char, code, matrix)
                stim_train[pos] = 1.0
                if is_target:
                    target_train[pos] = 1.0
                label = f"{code}:{'T' if is_target else 'N'}" if train else str(code)
                markers.append((pos * dt, label))
                pos += isi
        pos += pause

    sig = (np.convolve(target_train, p300)[:n, None] * p300_amplitude * _P300_PATTERN
           + np.convolve(stim_train, visual)[:n, None] * 0.5 * _VISUAL_PATTERN)
    noise = noise_std * rng.standard_normal((n, n_ch))
    # common-mode slow drift
    drift = np.cumsum(rng.standard_normal(n)) * 0.02
    drift -= np.linspace(drift[0], drift[-1], n)
    x = sig + noise + drift[:, None]
    t = np.arange(n) * dt
    return make_data(x, [t, list(P300_CHANNELS)], ["time", "channel"], ["ms", "uV"],
                     {"text": text, "matrix": matrix, "repetitions": repetitions,
                      "fs_hz": fs_hz}, MarkerList(tuple(markers)))


def make_oscillatory_recording(n_trials_per_class: int = 50, n_channels: int = 16,
                               fs_hz: float = 250.0, trial_ms: float = 3000.0,
                               band_hz=(10.0, 25.0), power_ratio: float = 6.0,
                               noise_std: float = 0.5, seed: int = 0,
                               classes=("finger", "tongue"), mixing=None) -> Data:
    """Continuous two-class recording of back-to-back trials.

    Source 0 is strong during trials of the first class, source 1 during the
    second (amplitude ratio ``sqrt(power_ratio)``). The remaining
    ``n_channels - 2`` sources are class independent. The mixing matrix and
    the per-trial class sequence are stored in ``extra``; a marker labelled
    with the class name sits at the onset of every trial.
    """
    rng = np.random.default_rng(seed)
    dt = 1000.0 / fs_hz
    n_trial = int(round(trial_ms / dt))
    labels = np.array([0] * n_trials_per_class + [1] * n_trials_per_class)
    rng.shuffle(labels)
    n = n_trial * len(labels)
    n_src = n_channels

    bp = design_bandpass(band_hz[0], band_hz[1], fs_hz, 4)
    white = rng.standard_normal((n + 500, n_src))
    t_pad = np.arange(n + 500) * dt
    raw = make_data(white, [t_pad, [f"s{i}" for i in range(n_src)]],
                    ["time", "channel"], ["ms", "#"])
    sources = apply_filter(raw, bp)[0].values[500:]
    sources = sources / sources.std(axis=0)

    hi, lo = np.sqrt(power_ratio), 1.0
    gain = np.ones((n, n_src))
    for k, c in enumerate(labels):
        sl = slice(k * n_trial, (k + 1) * n_trial)
        gain[sl, 0] = hi if c == 0 else lo
        gain[sl, 1] = lo if c == 0 else hi
    sources = sources * gain
    if mixing is None:
        mixing = rng.standard_normal((n_channels, n_src))
    mixing = np.asarray(mixing, dtype=float)
    x = sources @ mixing.T + noise_std * rng.standard_normal((n, n_channels))
    t = np.arange(n) * dt
    markers = [(k * n_trial * dt, classes[c]) for k, c in enumerate(labels)]
    return make_data(x, [t, [f"ch{i + 1}" for i in range(n_channels)]],
                     ["time", "channel"], ["ms", "uV"],
                     {"mixing": mixing.tolist(), "trial_classes": [classes[c] for c in labels],
                      "fs_hz": fs_hz},
                     MarkerList(tuple(markers)))


def shuffle_speller_codes(data: Data, seed: int = 0) -> Data:
    """Randomly reassign stimulus codes among the stimuli of each character.

    Breaks the link between the evoked responses and the row/column they
    belong to while keeping every code's count per character, so a speller
    decoding the result performs at chance level.
    """
    rng = np.random.default_rng(seed)
    reps = int(data.extra.get("repetitions", 15))
    block = 12 * reps
    entries = list(data.markers.entries)
    stim = [i for i, (_, lbl) in enumerate(entries) if lbl.split(":")[0] in SPELLER_CODES]
    for b in range(0, len(stim), block):
        idx = stim[b:b + block]
        codes = [entries[i][1].split(":")[0] for i in idx]
        perm = rng.permutation(len(codes))
        for i, j in zip(idx, perm):
            entries[i] = (entries[i][0], codes[j])
    return make_data(data.values, data.axes, data.names, data.units, data.extra,
                     MarkerList(tuple(entries)))
