import os
import subprocess
import sys

import numpy as np
import pytest
import scipy.signal as ss
from hypothesis import given, settings
from hypothesis import strategies as st

from bcikit import _kernels
from bcikit.sigproc import design_bandpass

BACKENDS = _kernels.available_backends()


def random_case(seed, n=400, ch=3, order=3):
    rng = np.random.default_rng(seed)
    c = design_bandpass(1.0, 30.0, 250.0, order)
    b, a = c.padded()
    x = np.ascontiguousarray(rng.standard_normal((n, ch)))
    zi = rng.standard_normal((ch, len(a) - 1))
    return b, a, x, zi


def test_compiled_backend_is_built():
    # the extension is part of the normal install; the fallback is for
    # environments without a compiler
    assert "cython" in BACKENDS
    assert _kernels.BACKEND in BACKENDS


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_backend_matches_scipy(name):
    b, a, x, zi = random_case(0)
    y, zf = BACKENDS[name](b, a, x, zi)
    ry, rzf = ss.lfilter(b, a, x, axis=0, zi=zi.T)
    np.testing.assert_allclose(y, ry, rtol=0, atol=1e-12)
    np.testing.assert_allclose(zf, rzf.T, rtol=0, atol=1e-12)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(0, 300), ch=st.integers(1, 5),
       order=st.integers(1, 5))
def test_backends_bit_identical(seed, n, ch, order):
    b, a, x, zi = random_case(seed, n, ch, order)
    y1, z1 = BACKENDS["cython"](b, a, x, zi)
    y2, z2 = BACKENDS["python"](b, a, x, zi)
    assert np.asarray(y1).tobytes() == np.asarray(y2).tobytes()
    assert np.asarray(z1).tobytes() == np.asarray(z2).tobytes()


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_inputs_untouched(name):
    b, a, x, zi = random_case(1)
    x0, zi0 = x.copy(), zi.copy()
    BACKENDS[name](b, a, x, zi)
    assert np.array_equal(x, x0) and np.array_equal(zi, zi0)


def test_env_var_forces_fallback():
    code = "import bcikit._kernels as k; print(k.BACKEND)"
    env = dict(os.environ, BCIKIT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    assert out.stdout.strip() == "python"


CASCADES = _kernels.available_cascades()


def sos_case(seed, n, ch, order):
    rng = np.random.default_rng(seed)
    c = design_bandpass(0.5, 40.0, 500.0, order)
    sos = np.array(c.sos)
    x = np.ascontiguousarray(rng.standard_normal((n, ch)))
    zi = rng.standard_normal((ch, 2 * len(sos)))
    return sos, x, zi


@pytest.mark.parametrize("name", sorted(CASCADES))
def test_cascade_matches_scipy(name):
    sos, x, zi = sos_case(2, 500, 3, 5)
    m = len(sos)
    # scipy keeps the state as (section, 2, channel)
    y, zf = CASCADES[name](sos, x, zi)
    ry, rzf = ss.sosfilt(sos, x, axis=0, zi=zi.T.reshape(m, 2, 3))
    np.testing.assert_allclose(y, ry, rtol=0, atol=1e-12)
    np.testing.assert_allclose(zf, rzf.reshape(2 * m, 3).T, rtol=0, atol=1e-12)


@pytest.mark.skipif(len(CASCADES) < 2, reason="compiled kernel not built")
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(0, 40), ch=st.integers(1, 4),
       order=st.integers(1, 6))
def test_cascades_bit_identical(seed, n, ch, order):
    # short signals exercise the ramp-up and ramp-down of the wavefront
    sos, x, zi = sos_case(seed, n, ch, order)
    y1, z1 = CASCADES["cython"](sos, x, zi)
    y2, z2 = CASCADES["python"](sos, x, zi)
    assert y1.tobytes() == y2.tobytes()
    assert z1.tobytes() == z2.tobytes()
