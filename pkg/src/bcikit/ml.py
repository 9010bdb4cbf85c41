"""Binary linear discriminant analysis, optionally with shrinkage."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    FeatureCountMismatch,
    NotTwoClasses,
    SingularCovariance,
    TooFewObservations,
)
from .features import FeatureVectors

__all__ = [
    "LdaModel",
    "ShrinkageEstimate",
    "shrinkage_covariance",
    "train_lda",
    "apply_lda",
    "predict",
    "lda_to_json",
    "lda_from_json",
]


@dataclass(frozen=True, eq=False)
class ShrinkageEstimate:
    sigma_shrunk: np.ndarray
    gamma: float
    nu: float


@dataclass(frozen=True, eq=False)
class LdaModel:
    """``score = w . x + b``; positive scores belong to ``class_names[0]``."""

    w: np.ndarray
    b: float
    gamma: float = 0.0
    class_names: tuple[str, str] = ("class1", "class2")


def _shrinkage_gamma(xc: np.ndarray, s: np.ndarray) -> float:
    """Analytic shrinkage intensity towards ``nu * I``.

    ``xc`` are centred observations and ``s`` their covariance estimate.
    Uses ``n / (n-1)**3 * sum_kl sum_i (z_ikl - mean_i z_kl)**2`` over the
    squared distance of ``s`` to the target, where ``z_ikl = x_ik x_il``.
    """
    n, d = xc.shape
    nu = np.trace(s) / d
    # sum_i sum_kl (z_ikl - zbar_kl)^2 without forming the n x d x d tensor
    sq = np.einsum("ij,ij->i", xc, xc)
    zbar = xc.T @ xc / n
    var_sum = float(np.sum(sq ** 2) - n * np.sum(zbar ** 2))
    var_sum = max(var_sum, 0.0)
    target_dist = float(np.sum((s - nu * np.eye(d)) ** 2))
    if target_dist == 0.0:
        return 1.0
    gamma = n / (n - 1) ** 3 * var_sum / target_dist
    return float(np.clip(gamma, 0.0, 1.0))


def _shrink(s: np.ndarray, gamma: float) -> tuple[np.ndarray, float]:
    d = s.shape[0]
    nu = float(np.trace(s) / d)
    if gamma == 0.0:
        out = s.copy()
    elif gamma == 1.0:
        out = nu * np.eye(d)
    else:
        out = (1.0 - gamma) * s + gamma * nu * np.eye(d)
    return 0.5 * (out + out.T), nu


def shrinkage_covariance(x, gamma: float | None = None) -> ShrinkageEstimate:
    """Covariance shrunk towards a scaled identity.

    ``(1 - gamma) * S + gamma * nu * I`` with ``S`` the empirical covariance
    (denominator ``n - 1``) and ``nu = trace(S) / d``. When ``gamma`` is None
    it is chosen analytically and clipped to ``[0, 1]``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise TooFewObservations("need at least two observations")
    xc = x - x.mean(axis=0)
    s = xc.T @ xc / (n - 1)
    if gamma is None:
        gamma = _shrinkage_gamma(xc, s)
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be in [0, 1]")
    sigma, nu = _shrink(s, gamma)
    return ShrinkageEstimate(sigma, gamma, nu)


def _is_singular(s: np.ndarray) -> bool:
    ev = np.linalg.eigvalsh(s)
    return ev.max() <= 0 or ev.min() <= 1e-10 * ev.max()


def train_lda(fv: FeatureVectors, use_shrinkage: bool = True, gamma: float | None = None,
              positive: str | None = None) -> LdaModel:
    """Train a two-class LDA.

    The within-class covariance is pooled from class-centred observations
    with denominator ``n - 2``; with shrinkage enabled the intensity is
    estimated on those centred observations (or taken from ``gamma``).
    ``positive`` names the class that receives positive scores; by default
    the first entry of ``fv.class_names``.

    Raises
    ------
    NotTwoClasses
        If not exactly two classes with at least two observations each.
    SingularCovariance
        If the covariance cannot be inverted (only without shrinkage).
    """
    x = np.asarray(fv.values, dtype=np.float64)
    labels = np.asarray(fv.labels)
    present = sorted(set(labels.tolist()) - {-1})
    if len(present) != 2:
        raise NotTwoClasses(f"need exactly two classes, got {len(present)}")
    names = list(fv.class_names)
    first = names.index(positive) if positive is not None else present[0]
    if first not in present:
        raise NotTwoClasses(f"class {positive!r} has no observations")
    second = present[1] if present[0] == first else present[0]
    x1, x2 = x[labels == first], x[labels == second]
    if len(x1) < 2 or len(x2) < 2:
        raise NotTwoClasses("each class needs at least two observations")
    mu1, mu2 = x1.mean(axis=0), x2.mean(axis=0)
    xc = np.concatenate([x1 - mu1, x2 - mu2])
    n = xc.shape[0]
    s = xc.T @ xc / (n - 2)
    if use_shrinkage:
        g = _shrinkage_gamma(xc, s) if gamma is None else float(gamma)
        sigma, _ = _shrink(s, g)
    else:
        g = 0.0
        sigma = s
        if _is_singular(sigma):
            raise SingularCovariance("pooled covariance is singular; enable shrinkage")
    w = np.linalg.solve(sigma, mu1 - mu2)
    b = float(-w @ (mu1 + mu2) / 2.0)
    w.flags.writeable = False
    return LdaModel(w, b, g, (names[first], names[second]))


def apply_lda(model: LdaModel, fv) -> np.ndarray:
    """Scores ``w . x + b`` for every observation (row)."""
    x = fv.values if isinstance(fv, FeatureVectors) else np.asarray(fv, dtype=np.float64)
    x = np.atleast_2d(x)
    if x.shape[1] != len(model.w):
        raise FeatureCountMismatch(f"model expects {len(model.w)} features, got {x.shape[1]}")
    return x @ model.w + model.b


def predict(model: LdaModel, fv) -> list[str]:
    """Class names; a score of exactly zero goes to the first class."""
    return [model.class_names[0] if s >= 0 else model.class_names[1]
            for s in apply_lda(model, fv)]


def lda_to_json(model: LdaModel) -> str:
    return json.dumps({"w": [float(v) for v in model.w], "b": float(model.b),
                       "gamma": float(model.gamma), "class_names": list(model.class_names)},
                      sort_keys=True)


def lda_from_json(text: str) -> LdaModel:
    obj = json.loads(text)
    return LdaModel(np.asarray(obj["w"], dtype=np.float64), float(obj["b"]),
                    float(obj["gamma"]), tuple(obj["class_names"]))
