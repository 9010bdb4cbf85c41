"""Feature extraction on epoched data.

Epoched data is ``(class, time, channel)``: the first axis holds the class
name of every epoch.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Data, axis_index, make_data, with_replaced
from .errors import (
    ColumnOutOfRange,
    DegenerateTarget,
    EmptyIntervalWindow,
    LengthMismatch,
    NoEpochs,
    NonFiniteValues,
    NotTwoClasses,
    SingularCompositeCovariance,
    SingularMeanCovariance,
    ZeroVarianceWarning,
)

__all__ = [
    "CspModel",
    "SpocModel",
    "FeatureVectors",
    "class_names",
    "classwise_average",
    "jumping_means",
    "signed_r_squared",
    "train_csp",
    "apply_csp",
    "train_spoc",
    "apply_spoc",
    "log_variance",
    "create_feature_vectors",
]

# relative eigenvalue cut-off for rank deficiency
_RANK_TOL = 1e-10


def class_names(epo: Data, axis: str = "class") -> list[str]:
    """Distinct class names in order of first appearance."""
    seen = {}
    for c in epo.axes[axis_index(epo, axis)]:
        seen.setdefault(str(c), None)
    return list(seen)


def classwise_average(epo: Data, axis: str = "class") -> Data:
    """Average the epochs of every class.

    The class axis of the result holds each class name once, in order of
    first appearance.
    """
    ax = axis_index(epo, axis)
    if epo.shape[ax] == 0:
        raise NoEpochs("no epochs to average")
    labels = np.asarray(epo.axes[ax]).astype(str)
    names = class_names(epo, axis)
    means = [np.take(epo.values, np.flatnonzero(labels == c), axis=ax).mean(axis=ax)
             for c in names]
    return with_replaced(epo, np.stack(means, axis=ax), axes={ax: np.array(names)})


def jumping_means(epo: Data, intervals_ms, axis: str = "time") -> Data:
    """Mean over each ``[start, end)`` interval of the time axis.

    The time axis is replaced by an ``interval`` axis labelled with the
    interval midpoints (ms).

    Raises
    ------
    EmptyIntervalWindow
        If an interval contains no sample.
    """
    ax = axis_index(epo, axis)
    t = np.asarray(epo.axes[ax])
    means, mids = [], []
    for start, end in intervals_ms:
        mask = (t >= start) & (t < end)
        if not mask.any():
            raise EmptyIntervalWindow(f"interval [{start}, {end}) contains no samples")
        means.append(np.compress(mask, epo.values, axis=ax).mean(axis=ax))
        mids.append(0.5 * (start + end))
    return with_replaced(epo, np.stack(means, axis=ax), axes={ax: np.array(mids, dtype=float)},
                         names={ax: "interval"})


def _two_class_split(epo: Data, axis: str, classes=None):
    ax = axis_index(epo, axis)
    labels = np.asarray(epo.axes[ax]).astype(str)
    names = list(classes) if classes is not None else class_names(epo, axis)
    if len(names) != 2 or len(set(labels)) != 2 or not set(labels) <= set(names):
        raise NotTwoClasses(f"need exactly two classes, got {sorted(set(labels))}")
    x1 = np.take(epo.values, np.flatnonzero(labels == names[0]), axis=ax)
    x2 = np.take(epo.values, np.flatnonzero(labels == names[1]), axis=ax)
    return ax, names, np.moveaxis(x1, ax, 0), np.moveaxis(x2, ax, 0)


def signed_r_squared(epo: Data, axis: str = "class", classes=None) -> Data:
    """Signed squared point-biserial correlation between class and value.

    For every point ``r = sqrt(N1*N2)/(N1+N2) * (m1 - m2) / s`` where ``s`` is
    the population standard deviation of all ``N1 + N2`` values; the result is
    ``sign(r) * r**2``. Points with zero variance are set to 0 and a
    :class:`ZeroVarianceWarning` is emitted. ``classes`` fixes which class is
    first; by default the order of first appearance.
    """
    ax, names, x1, x2 = _two_class_split(epo, axis, classes)
    n1, n2 = x1.shape[0], x2.shape[0]
    if n1 < 2 or n2 < 2:
        raise NotTwoClasses("each class needs at least two epochs")
    # pooled over the epochs in their original order, so that swapping the
    # classes negates the result exactly
    labels = np.asarray(epo.axes[ax]).astype(str)
    both = np.moveaxis(np.compress(np.isin(labels, names), epo.values, axis=ax), ax, 0)
    sd = both.std(axis=0)
    diff = x1.mean(axis=0) - x2.mean(axis=0)
    zero = sd == 0
    if zero.any():
        warnings.warn(f"{int(zero.sum())} points with zero variance set to 0",
                      ZeroVarianceWarning, stacklevel=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(n1 * n2) / (n1 + n2) * diff / sd
    r = np.where(zero, 0.0, r)
    r2 = np.clip(np.sign(r) * r * r, -1.0, 1.0)
    axes = [epo.axes[d] for d in range(epo.ndim) if d != ax]
    names_ = [epo.names[d] for d in range(epo.ndim) if d != ax]
    units_ = [epo.units[d] for d in range(epo.ndim) if d != ax]
    extra = dict(epo.extra)
    extra["r2_classes"] = names
    return make_data(r2, axes, names_, units_, extra)


@dataclass(frozen=True, eq=False)
class CspModel:
    """CSP filters (columns of ``W``), patterns ``A`` and eigenvalues.

    Columns are sorted by descending eigenvalue; the first columns maximise
    the variance of the first class relative to the second.
    """

    W: np.ndarray
    A: np.ndarray
    lambdas: np.ndarray
    classes: tuple[str, str] = ("", "")


@dataclass(frozen=True, eq=False)
class SpocModel:
    """SPoC filters, patterns and eigenvalues (descending)."""

    W: np.ndarray
    A: np.ndarray
    lambdas: np.ndarray


def _epoch_covariances(x: np.ndarray) -> np.ndarray:
    """Channel covariance of every epoch in ``x`` (epoch, time, channel)."""
    xc = x - x.mean(axis=1, keepdims=True)
    return np.einsum("etc,etd->ecd", xc, xc) / max(x.shape[1] - 1, 1)


def _class_covariance(x: np.ndarray) -> np.ndarray:
    covs = _epoch_covariances(x)
    traces = np.trace(covs, axis1=1, axis2=2)
    traces = np.where(traces > 0, traces, 1.0)
    return (covs / traces[:, None, None]).mean(axis=0)


def _whitened_eigh(target: np.ndarray, reference: np.ndarray, error):
    """Solve ``target w = lambda reference w`` via whitening of ``reference``.

    Returns eigenvalues (descending) and filters normalised to
    ``w' reference w == 1``. Ties keep their original order.
    """
    reference = 0.5 * (reference + reference.T)
    d, u = np.linalg.eigh(reference)
    if d.max() <= 0 or d.min() < _RANK_TOL * d.max():
        raise error("reference covariance is singular or not positive definite")
    p = u / np.sqrt(d)  # whitening: p' reference p == I
    s = p.T @ target @ p
    lam, v = np.linalg.eigh(0.5 * (s + s.T))
    order = np.argsort(-lam, kind="stable")
    return lam[order], p @ v[:, order]


def train_csp(epo: Data, axis: str = "class", classes=None) -> CspModel:
    """Common spatial patterns for two classes.

    Per class, every epoch's channel covariance is normalised by its trace
    and averaged. The generalised problem ``S1 w = lambda (S1 + S2) w`` is
    solved by whitening ``S1 + S2``.

    Raises
    ------
    NotTwoClasses
    SingularCompositeCovariance
        If ``S1 + S2`` is rank deficient.
    """
    ax, names, x1, x2 = _two_class_split(epo, axis, classes)
    if x1.ndim != 3:
        raise NotTwoClasses("expected (class, time, channel) data")
    s1 = _class_covariance(x1)
    s2 = _class_covariance(x2)
    lam, w = _whitened_eigh(s1, s1 + s2, SingularCompositeCovariance)
    a = np.linalg.inv(w).T
    return CspModel(w, a, np.clip(lam, 0.0, 1.0), (names[0], names[1]))


def _project(epo: Data, W: np.ndarray, columns, axis: str, prefix: str) -> Data:
    ax = axis_index(epo, axis)
    n = W.shape[1]
    columns = list(range(n)) if columns is None else [int(c) for c in columns]
    for c in columns:
        if not -n <= c < n:
            raise ColumnOutOfRange(f"column {c} out of range for {n} filters")
    if epo.shape[ax] != W.shape[0]:
        raise ColumnOutOfRange(f"data has {epo.shape[ax]} channels, filters expect {W.shape[0]}")
    x = np.moveaxis(epo.values, ax, -1)
    y = np.moveaxis(x @ W[:, columns], -1, ax)
    labels = np.array([f"{prefix}{c % n}" for c in columns])
    return with_replaced(epo, y, axes={ax: labels}, names={ax: "component"})


def apply_csp(epo: Data, model: CspModel, columns=None, axis: str = "channel") -> Data:
    """Project the channel axis through the selected columns of ``W``."""
    return _project(epo, model.W, columns, axis, "csp")


def train_spoc(epo: Data, z, axis: str = "class") -> SpocModel:
    """Source power co-modulation (lambda variant).

    ``z`` is standardised; with ``C_e`` the covariance of epoch ``e``,
    ``C = mean(C_e)`` and ``Cz = mean(z_e * C_e)`` the filters solve
    ``Cz w = lambda C w``, sorted by descending ``lambda`` and normalised to
    ``w' C w == 1``.
    """
    ax = axis_index(epo, axis)
    x = np.moveaxis(epo.values, ax, 0)
    z = np.asarray(z, dtype=np.float64).ravel()
    if len(z) != x.shape[0]:
        raise LengthMismatch(f"{len(z)} target values for {x.shape[0]} epochs")
    if len(z) < 2 or z.std() == 0:
        raise DegenerateTarget("target variable has zero variance")
    z = (z - z.mean()) / z.std()
    covs = _epoch_covariances(x)
    c_mean = covs.mean(axis=0)
    c_z = np.einsum("e,ecd->cd", z, covs) / len(z)
    lam, w = _whitened_eigh(c_z, c_mean, SingularMeanCovariance)
    a = c_mean @ w
    return SpocModel(w, a, lam)


def apply_spoc(epo: Data, model: SpocModel, columns=None, axis: str = "channel") -> Data:
    return _project(epo, model.W, columns, axis, "spoc")


def log_variance(epo: Data, axis: str = "time") -> Data:
    """Log of the variance along ``axis``; the axis is dropped."""
    ax = axis_index(epo, axis)
    v = np.log(np.var(epo.values, axis=ax, ddof=1))
    keep = [d for d in range(epo.ndim) if d != ax]
    return make_data(v, [epo.axes[d] for d in keep], [epo.names[d] for d in keep],
                     [epo.units[d] for d in keep], epo.extra)


@dataclass(frozen=True, eq=False)
class FeatureVectors:
    """Observations x features with per-observation class indices."""

    values: np.ndarray
    labels: np.ndarray
    class_names: tuple[str, ...]
    feature_names: np.ndarray
    extra: dict

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def __len__(self) -> int:
        return self.values.shape[0]


def create_feature_vectors(data: Data, class_order=None) -> FeatureVectors:
    """Flatten all but the first axis (row-major) into one feature axis.

    The first axis holds the observations and, for epoched data, the class
    names that become the labels.
    """
    v = data.values.reshape(data.shape[0], -1)
    if not np.all(np.isfinite(v)):
        raise NonFiniteValues("feature vectors contain NaN or Inf")
    obs = np.asarray(data.axes[0]).astype(str)
    names = list(class_order) if class_order is not None else list(dict.fromkeys(obs))
    index = {c: i for i, c in enumerate(names)}
    labels = np.array([index.get(c, -1) for c in obs], dtype=int)
    if data.ndim > 1:
        grids = np.meshgrid(*[np.asarray(a).astype(str) for a in data.axes[1:]], indexing="ij")
        feat = np.array(["/".join(p) for p in zip(*[g.ravel() for g in grids])])
    else:
        feat = np.array(["value"])
    v = v.copy()
    v.flags.writeable = False
    return FeatureVectors(v, labels, tuple(names), feat, dict(data.extra))
