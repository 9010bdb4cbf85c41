"""Numerical hot loops.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Set ``BCIKIT_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _fallback

BACKEND = "python"

if os.environ.get("BCIKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._lfilter import lfilter_df2t
        BACKEND = "cython"
    except ImportError:  # extension not built
        lfilter_df2t = _fallback.lfilter_df2t
else:
    lfilter_df2t = _fallback.lfilter_df2t


def _cascade(kernel):
    def sosfilt_df2t(sos, x, zi):
        """Cascade of second-order sections, one kernel call per section."""
        y = x
        zf = np.empty_like(zi)
        for k, row in enumerate(sos):
            sl = slice(2 * k, 2 * k + 2)
            y, zf[:, sl] = kernel(row[:3], row[3:], y, np.ascontiguousarray(zi[:, sl]))
        if len(sos) == 0:
            y = np.array(x, copy=True)
        return y, zf
    return sosfilt_df2t


sosfilt_df2t = (_fallback.sosfilt_df2t if BACKEND == "python" else _cascade(lfilter_df2t))


def available_backends():
    """Map backend name to its ``lfilter_df2t`` implementation."""
    out = {"python": _fallback.lfilter_df2t}
    try:
        from ._lfilter import lfilter_df2t as compiled
        out["cython"] = compiled
    except ImportError:
        pass
    return out


def available_cascades():
    """Map backend name to its ``sosfilt_df2t`` implementation."""
    out = {"python": _fallback.sosfilt_df2t}
    try:
        from ._lfilter import lfilter_df2t as compiled
        out["cython"] = _cascade(compiled)
    except ImportError:
        pass
    return out
