"""Replay source, online runner and the two example pipelines.

The online runner processes a recording chunk by chunk exactly the way an
acquisition loop would::

    block buffer -> stateful filter -> subsample -> ring buffer
      -> epochs for completed marker windows -> features -> LDA

:func:`run_offline` computes the same decisions from the whole recording at
once; both paths share the epoch and feature code so that their scores agree
to rounding error.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Iterator

import numpy as np

from .buffers import BlockBuffer, RingBuffer, block_append_drain, block_flush, ring_append, ring_get
from .data import Data, MarkerList, make_data, sampling_rate
from .errors import ConfigMismatch, IncompleteSequence
from .features import (
    CspModel,
    apply_csp,
    create_feature_vectors,
    jumping_means,
    log_variance,
    train_csp,
)
from .ml import LdaModel, apply_lda, predict, train_lda
from .sigproc import (
    IirCoefficients,
    apply_filter,
    design_bandpass,
    remove_baseline,
    segment,
    select_channels,
    subsample,
)
from .synthetic import SPELLER_CODES, SPELLER_MATRIX

__all__ = [
    "ReplaySource",
    "PipelineConfig",
    "Decision",
    "erp_config",
    "csp_config",
    "speller_class_defs",
    "replay_chunks",
    "preprocess",
    "extract_features",
    "run_online",
    "run_offline",
    "speller_decision",
    "train_erp",
    "train_csp_pipeline",
    "pipeline_erp",
    "pipeline_csp",
]


@dataclass(frozen=True, eq=False)
class ReplaySource:
    """Pseudo amplifier: emits a recording in blocks of ``block_samples``.

    With ``realtime`` the blocks are paced at the recording's sampling rate.
    """

    source: Data
    block_samples: int = 12
    realtime: bool = False


def replay_chunks(src: ReplaySource) -> Iterator[tuple[Data, MarkerList]]:
    """Yield ``(chunk, markers)`` in order.

    There are ``ceil(N / block)`` chunks; the last may be short. A marker is
    emitted with the chunk holding the first sample at or after its time;
    markers past the last sample go with the last chunk.
    """
    if int(src.block_samples) < 1:
        raise ValueError("block_samples must be at least 1")
    data = src.source
    k = int(src.block_samples)
    t = np.asarray(data.axes[0])
    n = len(t)
    markers = data.markers or MarkerList()
    dt = 1000.0 / sampling_rate(data) if n > 1 else 1.0
    n_chunks = -(-n // k)
    owner = {}
    for i, (mt, lbl) in enumerate(markers.entries):
        idx = int(np.searchsorted(t, mt - 1e-6 * dt, side="left"))
        owner.setdefault(min(idx // k, max(n_chunks - 1, 0)), []).append((mt, lbl))
    start = time.monotonic()
    for c in range(n_chunks):
        if src.realtime:
            due = start + c * k * dt / 1000.0
            delay = due - time.monotonic()
            if delay > 0:
                time.sleep(delay)
        sl = slice(c * k, min((c + 1) * k, n))
        chunk = make_data(data.values[sl], [t[sl], data.axes[1]], data.names, data.units,
                          data.extra)
        yield chunk, MarkerList(tuple(owner.get(c, ())))


@dataclass
class PipelineConfig:
    """Parameters of a processing chain.

    ``feature`` is ``"jumping_means"`` or ``"csp"``. ``speller_repetitions``
    switches on character decisions for row/column speller recordings.
    """

    fs_hz: float
    interval_ms: tuple[float, float]
    class_defs: dict
    band_hz: tuple[float, float] | None = None
    filter_order: int = 5
    subsample_hz: float | None = None
    channels: list | None = None
    baseline_ms: tuple[float, float] | None = None
    feature: str = "jumping_means"
    jm_intervals_ms: list = field(default_factory=list)
    csp_filters_per_side: int = 3
    shrinkage: bool = True
    positive_class: str | None = None
    speller_repetitions: int | None = None
    speller_matrix: str = SPELLER_MATRIX

    def __post_init__(self):
        self.validate()

    @property
    def processed_fs(self) -> float:
        return self.subsample_hz or self.fs_hz

    @property
    def subsample_factor(self) -> int:
        return int(round(self.fs_hz / self.processed_fs))

    def validate(self) -> None:
        start, end = self.interval_ms
        if not start < end:
            raise ConfigMismatch("epoch interval is empty")
        if self.band_hz is not None and not 0 < self.band_hz[0] < self.band_hz[1] < self.fs_hz / 2:
            raise ConfigMismatch(f"band {self.band_hz} invalid for fs {self.fs_hz}")
        if self.subsample_hz is not None:
            ratio = self.fs_hz / self.subsample_hz
            if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                raise ConfigMismatch("fs must be an integer multiple of subsample_hz")
            if self.band_hz is not None and self.band_hz[1] >= self.subsample_hz / 2:
                raise ConfigMismatch("band edge above the Nyquist rate after subsampling")
        if self.feature not in ("jumping_means", "csp"):
            raise ConfigMismatch(f"unknown feature stage {self.feature!r}")
        if self.feature == "jumping_means":
            if not self.jm_intervals_ms:
                raise ConfigMismatch("jumping means need intervals")
            for a, b in self.jm_intervals_ms:
                if not (start <= a < b <= end):
                    raise ConfigMismatch(f"interval [{a}, {b}) outside epoch [{start}, {end})")
        if self.feature == "csp" and self.csp_filters_per_side < 1:
            raise ConfigMismatch("need at least one CSP filter per side")
        if self.speller_repetitions is not None:
            if self.speller_repetitions < 1 or len(self.speller_matrix) != 36:
                raise ConfigMismatch("speller needs a 6x6 matrix and repetitions >= 1")

    def filter_coefficients(self) -> IirCoefficients | None:
        if self.band_hz is None:
            return None
        return design_bandpass(self.band_hz[0], self.band_hz[1], self.fs_hz, self.filter_order)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "PipelineConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise ConfigMismatch(f"unknown config keys {sorted(unknown)}")
        obj = dict(obj)
        for key in ("interval_ms", "band_hz", "baseline_ms"):
            if obj.get(key) is not None:
                obj[key] = tuple(obj[key])
        if obj.get("jm_intervals_ms"):
            obj["jm_intervals_ms"] = [tuple(iv) for iv in obj["jm_intervals_ms"]]
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigMismatch(str(exc)) from None

    def replace(self, **changes) -> "PipelineConfig":
        d = self.to_dict()
        d.update(changes)
        return PipelineConfig.from_dict(d)


def speller_class_defs(train: bool) -> dict:
    """Marker label to class map for speller recordings.

    For training the class is ``target``/``nontarget`` from the suffix;
    otherwise the class is the stimulus code itself.
    """
    if train:
        out = {}
        for code in SPELLER_CODES:
            out[f"{code}:T"] = "target"
            out[f"{code}:N"] = "nontarget"
        return out
    out = {code: code for code in SPELLER_CODES}
    for code in SPELLER_CODES:
        out[f"{code}:T"] = code
        out[f"{code}:N"] = code
    return out


def erp_config(fs_hz: float = 240.0, **overrides) -> PipelineConfig:
    """Defaults for the P300 speller chain.

    Band-pass 0.1-30 Hz (order 3), subsampling to 120 Hz, epochs
    [0, 800) ms, jumping means over eight 50 ms windows in [0, 400) ms,
    shrinkage LDA, 15 repetitions.
    """
    base = dict(
        fs_hz=fs_hz,
        interval_ms=(0.0, 800.0),
        class_defs=speller_class_defs(train=False),
        band_hz=(0.1, 30.0),
        filter_order=3,
        subsample_hz=fs_hz / 2,
        feature="jumping_means",
        jm_intervals_ms=[(float(a), float(a + 50)) for a in range(0, 400, 50)],
        shrinkage=True,
        positive_class="target",
        speller_repetitions=15,
    )
    base.update(overrides)
    return PipelineConfig(**base)


def csp_config(fs_hz: float = 250.0, classes=("finger", "tongue"), **overrides) -> PipelineConfig:
    """Defaults for the CSP chain: 8-30 Hz order 5, 3 filters per side, log-variance."""
    base = dict(
        fs_hz=fs_hz,
        interval_ms=(0.0, 3000.0),
        class_defs={c: c for c in classes},
        band_hz=(8.0, 30.0),
        filter_order=5,
        feature="csp",
        csp_filters_per_side=3,
        shrinkage=True,
        positive_class=classes[0],
    )
    base.update(overrides)
    return PipelineConfig(**base)


@dataclass(frozen=True)
class Decision:
    """One classifier output.

    ``kind`` is ``"epoch"`` (one stimulus or trial; ``label`` is the
    predicted class, ``event`` the marker's class) or ``"character"``
    (``label`` is the spelled character, ``scores`` the summed row and column
    scores).
    """

    kind: str
    timestamp_ms: float
    label: str
    scores: tuple[float, ...]
    latency_ms: float = 0.0
    event: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def preprocess(data: Data, cfg: PipelineConfig) -> Data:
    """Offline equivalent of the online signal chain (causal filter from rest)."""
    if cfg.channels:
        data = select_channels(data, cfg.channels)
    coeffs = cfg.filter_coefficients()
    if coeffs is not None:
        data = apply_filter(data, coeffs)[0]
    if cfg.subsample_hz is not None:
        data = subsample(data, cfg.subsample_hz, fs_hz=cfg.fs_hz)
    return data


def _csp_columns(cfg: PipelineConfig, model: CspModel) -> list[int]:
    k = cfg.csp_filters_per_side
    n = model.W.shape[1]
    if 2 * k > n:
        raise ConfigMismatch(f"{2 * k} CSP filters requested, only {n} channels")
    return list(range(k)) + list(range(n - k, n))


def extract_features(epo: Data, cfg: PipelineConfig, csp: CspModel | None = None) -> Data:
    """Epochs to the (epoch x ...) feature tensor of the configured stage."""
    if cfg.baseline_ms is not None:
        epo = remove_baseline(epo, cfg.baseline_ms)
    if cfg.feature == "jumping_means":
        return jumping_means(epo, cfg.jm_intervals_ms)
    if csp is None:
        raise ConfigMismatch("CSP feature stage needs a trained CSP model")
    return log_variance(apply_csp(epo, csp, _csp_columns(cfg, csp)))


class _Speller:
    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.scores: list[float] = []
        self.codes: list[str] = []

    def add(self, code: str, score: float, t: float, latency: float) -> Decision | None:
        if self.cfg.speller_repetitions is None:
            return None
        self.codes.append(code)
        self.scores.append(score)
        if len(self.codes) < 12 * self.cfg.speller_repetitions:
            return None
        char, sums = _speller_sums(self.scores, self.codes, self.cfg.speller_repetitions,
                                   self.cfg.speller_matrix)
        self.scores, self.codes = [], []
        return Decision("character", t, char, tuple(sums), latency, "")


def _speller_sums(scores, codes, repetitions, matrix):
    sums = {c: 0.0 for c in SPELLER_CODES}
    counts = {c: 0 for c in SPELLER_CODES}
    for s, c in zip(scores, codes):
        if c not in sums:
            raise IncompleteSequence(f"unknown stimulus code {c!r}")
        sums[c] += float(s)
        counts[c] += 1
    bad = {c: n for c, n in counts.items() if n != repetitions}
    if bad:
        raise IncompleteSequence(f"codes seen a wrong number of times: {bad}")
    rows = [sums[f"R{i}"] for i in range(1, 7)]
    cols = [sums[f"C{i}"] for i in range(1, 7)]
    r = int(np.argmax(rows))  # first maximum wins ties
    c = int(np.argmax(cols))
    return matrix[6 * r + c], rows + cols


def speller_decision(scores, labels, repetitions: int, matrix: str = SPELLER_MATRIX) -> str:
    """Character at the best-scoring row and column.

    Scores are summed per stimulus code (``R1``..``R6``, ``C1``..``C6``)
    over all repetitions; ties go to the lowest index.

    Raises
    ------
    IncompleteSequence
        If any code was not seen exactly ``repetitions`` times.
    """
    return _speller_sums(scores, [str(lbl).split(":")[0] for lbl in labels],
                         repetitions, matrix)[0]


def _decide(epo: Data, cfg: PipelineConfig, model: LdaModel, csp, markers, speller: _Speller,
            latency: float, out: list) -> None:
    if epo.shape[0] == 0:
        return
    fv = create_feature_vectors(extract_features(epo, cfg, csp))
    scores = apply_lda(model, fv)
    labels = predict(model, fv)
    for (t, _), cls, s, lbl in zip(markers, epo.axes[0], scores, labels):
        out.append(Decision("epoch", float(t), lbl, (float(s),), latency, str(cls)))
        ch = speller.add(str(cls), float(s), float(t), latency)
        if ch is not None:
            out.append(ch)


def run_offline(data: Data, cfg: PipelineConfig, model: LdaModel,
                csp: CspModel | None = None) -> list[Decision]:
    """Decisions computed from the whole recording at once."""
    cont = preprocess(data, cfg)
    epo = segment(cont, data.markers, cfg.class_defs, cfg.interval_ms, fs_hz=cfg.processed_fs)
    out: list[Decision] = []
    _decide(epo, cfg, model, csp, epo.extra["epoch_markers"], _Speller(cfg), 0.0, out)
    return out


def run_online(src: ReplaySource, cfg: PipelineConfig, model: LdaModel,
               csp: CspModel | None = None) -> list[Decision]:
    """Process a replayed recording chunk by chunk.

    One decision is emitted per completed epoch, plus one per character when
    the speller is configured. Latency is wall-clock time from chunk arrival
    to decision.

    Raises
    ------
    ConfigMismatch
        If the recording or the model does not fit the configuration.
    """
    data = src.source
    if len(data.axes[0]) > 1 and abs(sampling_rate(data) - cfg.fs_hz) > 1e-6 * cfg.fs_hz:
        raise ConfigMismatch(f"recording is {sampling_rate(data)} Hz, config says {cfg.fs_hz} Hz")
    if cfg.feature == "csp" and csp is None:
        raise ConfigMismatch("CSP feature stage needs a trained CSP model")

    coeffs = cfg.filter_coefficients()
    k = cfg.subsample_factor
    fs_out = cfg.processed_fs
    dt_out = 1000.0 / fs_out
    start, end = cfg.interval_ms
    n_epoch = int(round((end - start) * fs_out / 1000.0))
    max_emit = int(src.block_samples) + k
    capacity_ms = (end - start) + (max_emit / k + 2) * dt_out
    block = BlockBuffer(k)
    ring = RingBuffer(capacity_ms, fs_hz=fs_out)
    fstate = None
    pending: list[tuple[float, str]] = []
    speller = _Speller(cfg)
    out: list[Decision] = []

    def consume(raw: Data | None, markers: MarkerList, arrived: float):
        nonlocal ring, fstate
        if raw is not None and raw.shape[0]:
            x = raw
            if coeffs is not None:
                x, fstate = apply_filter(x, coeffs, fstate)
            if k > 1:
                x = subsample(x, fs_out, fs_hz=cfg.fs_hz)
            ring = ring_append(ring, x, markers)
        if ring.sample_count == 0:
            return
        last = ring.last_time_ms
        snap = None
        while pending:
            mt, lbl = pending[0]
            if mt + start + (n_epoch - 1) * dt_out > last + 0.5 * dt_out:
                break
            pending.pop(0)
            if snap is None:
                snap, _ = ring_get(ring, absolute=True)
            epo = segment(snap, MarkerList(((mt, lbl),)), cfg.class_defs, cfg.interval_ms,
                          fs_hz=fs_out)
            latency = (time.perf_counter() - arrived) * 1000.0
            _decide(epo, cfg, model, csp, epo.extra["epoch_markers"], speller, latency, out)

    for chunk, markers in replay_chunks(src):
        arrived = time.perf_counter()
        if cfg.channels:
            chunk = select_channels(chunk, cfg.channels)
        pending.extend(m for m in markers if m[1] in cfg.class_defs)
        block, emitted = block_append_drain(block, chunk)
        consume(emitted, markers, arrived)
    block, rest = block_flush(block)
    consume(rest, MarkerList(), time.perf_counter())
    return out


# ----------------------------------------------------------------------------
# training and the two example pipelines


def train_erp(train: Data, cfg: PipelineConfig) -> LdaModel:
    """Shrinkage LDA on jumping-mean features of a speller training recording."""
    cont = preprocess(train, cfg)
    epo = segment(cont, train.markers, speller_class_defs(train=True), cfg.interval_ms,
                  fs_hz=cfg.processed_fs)
    fv = create_feature_vectors(extract_features(epo, cfg), class_order=["target", "nontarget"])
    return train_lda(fv, use_shrinkage=cfg.shrinkage, positive="target")


def _letter_accuracy(decisions: list[Decision], text: str) -> tuple[str, float]:
    spelled = "".join(d.label for d in decisions if d.kind == "character")
    n = max(len(text), 1)
    hits = sum(a == b for a, b in zip(spelled, text))
    return spelled, hits / n


def pipeline_erp(train: Data, test: Data, cfg: PipelineConfig | None = None) -> dict:
    """Train on ``train``, spell ``test`` and report letter accuracy.

    The true text of the test recording is taken from ``test.extra["text"]``.
    """
    cfg = cfg or erp_config(sampling_rate(train))
    if cfg.speller_repetitions is None:
        raise ConfigMismatch("ERP pipeline needs speller_repetitions")
    model = train_erp(train, cfg)
    decisions = run_offline(test, cfg, model)
    truth = str(test.extra.get("text", ""))
    spelled, acc = _letter_accuracy(decisions, truth)
    return {
        "pipeline": "erp",
        "letters_true": truth,
        "letters_predicted": spelled,
        "n_letters": len(truth),
        "letter_accuracy": acc,
        "shrinkage_gamma": model.gamma,
        "n_epochs": sum(d.kind == "epoch" for d in decisions),
    }


def train_csp_pipeline(train: Data, cfg: PipelineConfig) -> tuple[CspModel, LdaModel]:
    """CSP filters and LDA on log-variance features."""
    cont = preprocess(train, cfg)
    epo = segment(cont, train.markers, cfg.class_defs, cfg.interval_ms, fs_hz=cfg.processed_fs)
    classes = list(dict.fromkeys(cfg.class_defs.values()))
    if cfg.positive_class in classes:
        classes.remove(cfg.positive_class)
        classes.insert(0, cfg.positive_class)
    csp = train_csp(epo, classes=classes)
    fv = create_feature_vectors(extract_features(epo, cfg, csp), class_order=classes)
    lda = train_lda(fv, use_shrinkage=cfg.shrinkage, positive=classes[0])
    return csp, lda


def _epoch_accuracy(decisions: list[Decision]) -> float:
    ep = [d for d in decisions if d.kind == "epoch"]
    return sum(d.label == d.event for d in ep) / max(len(ep), 1)


def pipeline_csp(train: Data, test: Data, cfg: PipelineConfig | None = None) -> dict:
    """Train CSP + LDA on ``train`` and report accuracy on ``test`` epochs."""
    cfg = cfg or csp_config(sampling_rate(train))
    csp, lda = train_csp_pipeline(train, cfg)
    train_dec = run_offline(train, cfg, lda, csp)
    test_dec = run_offline(test, cfg, lda, csp)
    return {
        "pipeline": "csp",
        "n_train": sum(d.kind == "epoch" for d in train_dec),
        "n_test": sum(d.kind == "epoch" for d in test_dec),
        "train_accuracy": _epoch_accuracy(train_dec),
        "accuracy": _epoch_accuracy(test_dec),
        "csp_lambdas": [float(v) for v in csp.lambdas],
        "shrinkage_gamma": lda.gamma,
    }


def decisions_to_json(decisions: list[Decision]) -> str:
    return json.dumps([d.to_dict() for d in decisions])
