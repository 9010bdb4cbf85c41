"""Compare the IIR filter backends.

Usage::

    python3 benchmarks/bench_lfilter.py [--samples N] [--channels C] [--repeat R]

Two kernels are timed: the direct-form recursion on expanded polynomials
(``lfilter_df2t``) and the cascade of second-order sections
(``sosfilt_df2t``) that the filters actually run. Prints one JSON line per
kernel and backend with the best-of-R wall time and the maximum deviation
from the compiled kernel. scipy is included when it is installed.
"""

import argparse
import json
import time

import numpy as np

from bcikit._kernels import available_backends, available_cascades
from bcikit.sigproc import design_bandpass


def best_of(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    p = argparse.ArgumentParser()
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--channels", type=int, default=64)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    coeffs = design_bandpass(8.0, 30.0, 250.0, args.order)
    b, a = coeffs.padded()
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.standard_normal((args.samples, args.channels)))
    zi = np.zeros((args.channels, coeffs.n_state))

    sos = np.array(coeffs.sos)
    ba_impls = dict(available_backends())
    sos_impls = dict(available_cascades())
    try:
        from scipy.signal import lfilter, sosfilt

        ba_impls["scipy"] = lambda b_, a_, x_, z_: lfilter(b_, a_, x_, axis=0, zi=z_.T)
        m = len(sos)
        sos_impls["scipy"] = lambda s_, x_, z_: sosfilt(s_, x_, axis=0,
                                                        zi=z_.T.reshape(m, 2, -1))
    except ImportError:
        pass

    run(x, "lfilter_df2t", ba_impls, lambda fn: fn(b, a, x, zi), args.repeat)
    run(x, "sosfilt_df2t", sos_impls, lambda fn: fn(sos, x, zi), args.repeat)


def run(x, kernel, impls, call, repeat):
    ref = None
    results = {}
    for name in ("cython", "python", "scipy"):
        if name not in impls:
            continue
        secs, out = best_of(lambda: call(impls[name]), repeat)
        y = np.asarray(out[0])
        if ref is None:
            ref = y
        results[name] = secs
        print(json.dumps({"kernel": kernel, "backend": name, "seconds": round(secs, 6),
                          "msamples_per_s": round(x.size / secs / 1e6, 2),
                          "max_abs_dev": float(np.max(np.abs(y - ref)))}))
    if "cython" in results and "python" in results:
        print(json.dumps({"kernel": kernel,
                          "speedup_cython_vs_python": round(results["python"] / results["cython"], 1)}))

if __name__ == "__main__":
    main()
