"""Shared cases for the purity and metadata checks.

Every case is ``(name, make_inputs, op)``. ``make_inputs`` builds fresh
arguments; the check runs ``op`` on them and compares each Data argument
(and any plain array) with an independently built twin afterwards.
"""

import copy

import numpy as np

from bcikit.buffers import BlockBuffer, RingBuffer, block_append_drain, block_flush, ring_append, ring_get
from bcikit.data import Data, MarkerList, data_equal, make_data, with_replaced
from bcikit.features import (
    apply_csp,
    apply_spoc,
    classwise_average,
    create_feature_vectors,
    jumping_means,
    log_variance,
    signed_r_squared,
    train_csp,
    train_spoc,
)
from bcikit.ml import apply_lda, shrinkage_covariance, train_lda
from bcikit.sigproc import (
    apply_filter,
    design_bandpass,
    filtfilt,
    remove_baseline,
    segment,
    select_channels,
    spectrogram,
    spectrum,
    subsample,
)

SENTINEL = {"sentinel": {"id": 42, "tags": ["a", "b"]}}
CHANNELS = ["Fz", "Cz", "Pz", "Oz"]


def cnt():
    rng = np.random.default_rng(0)
    t = np.arange(1000) * 4.0
    marks = MarkerList(tuple((float(m), lbl) for m, lbl in
                             zip(range(200, 3600, 200), ["L", "R"] * 9)))
    return make_data(rng.standard_normal((1000, 4)), [t, CHANNELS], ["time", "channel"],
                     ["ms", "uV"], copy.deepcopy(SENTINEL), marks)


def epo():
    return segment(cnt(), cnt().markers, {"L": "left", "R": "right"}, (-100, 300))


_BP = design_bandpass(8, 30, 250, 4)


def _fv():
    return create_feature_vectors(jumping_means(epo(), [(0, 100), (100, 200)]))


CASES = [
    ("select_channels", lambda: (cnt(),), lambda d: select_channels(d, ["Cz", "P*"])),
    ("apply_filter", lambda: (cnt(),), lambda d: apply_filter(d, _BP)),
    ("filtfilt", lambda: (cnt(),), lambda d: filtfilt(d, _BP)),
    ("subsample", lambda: (cnt(),), lambda d: subsample(d, 125.0)),
    ("segment", lambda: (cnt(),), lambda d: segment(d, d.markers, {"L": "l"}, (0, 100))),
    ("remove_baseline", lambda: (epo(),), lambda e: remove_baseline(e, (-100, 0))),
    ("spectrum", lambda: (cnt(),), lambda d: spectrum(d)),
    ("spectrogram", lambda: (cnt(),), lambda d: spectrogram(d, 64, 0.5)),
    ("classwise_average", lambda: (epo(),), lambda e: classwise_average(e)),
    ("jumping_means", lambda: (epo(),), lambda e: jumping_means(e, [(0, 100)])),
    ("signed_r_squared", lambda: (epo(),), lambda e: signed_r_squared(e)),
    ("train_csp", lambda: (epo(),), lambda e: train_csp(e)),
    ("apply_csp", lambda: (epo(),), lambda e: apply_csp(e, train_csp(e), [0, 3])),
    ("train_spoc", lambda: (epo(), np.arange(17.0)), lambda e, z: train_spoc(e, z)),
    ("apply_spoc", lambda: (epo(),),
     lambda e: apply_spoc(e, train_spoc(e, np.arange(float(e.shape[0]))), [0])),
    ("log_variance", lambda: (epo(),), lambda e: log_variance(e)),
    ("create_feature_vectors", lambda: (epo(),), lambda e: create_feature_vectors(e)),
    ("shrinkage_covariance", lambda: (np.random.default_rng(1).standard_normal((20, 3)),),
     lambda x: shrinkage_covariance(x)),
    ("train_lda", lambda: (epo(),),
     lambda e: train_lda(create_feature_vectors(jumping_means(e, [(0, 100)])))),
    ("apply_lda", lambda: (np.random.default_rng(2).standard_normal((5, 8)),),
     lambda x: apply_lda(train_lda(_fv()), x)),
    ("with_replaced", lambda: (cnt(),), lambda d: with_replaced(d, extra={"more": 1})),
    ("ring_append", lambda: (cnt(),),
     lambda d: ring_get(ring_append(RingBuffer(400.0), d, d.markers))),
    ("block_append_drain", lambda: (cnt(),),
     lambda d: block_flush(block_append_drain(BlockBuffer(7), d)[0])),
]


def check_case(make_inputs, op) -> bool:
    args = make_inputs()
    twins = make_inputs()
    op(*args)
    for a, b in zip(args, twins):
        if isinstance(a, Data):
            if not data_equal(a, b):
                return False
        elif isinstance(a, np.ndarray):
            if a.tobytes() != b.tobytes():
                return False
    return True


def sentinel_pipeline():
    """Five stages: channel selection, band-pass, subsampling, epoching, jumping means."""
    d = select_channels(cnt(), ["Fz", "Cz", "Pz"])
    d = apply_filter(d, design_bandpass(1, 20, 250, 3))[0]
    d = subsample(d, 125.0)
    d = segment(d, d.markers, {"L": "left", "R": "right"}, (0, 400))
    d = jumping_means(d, [(0, 200), (200, 400)])
    return d


def sentinel_survives() -> bool:
    out = sentinel_pipeline()
    return out.extra.get("sentinel") == SENTINEL["sentinel"]
