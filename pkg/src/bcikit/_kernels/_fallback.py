"""Pure numpy implementation of the kernels, used when the extension is absent.

The arithmetic is evaluated in exactly the same order as the compiled
version, so both backends agree bit for bit.
"""

import numpy as np


def lfilter_df2t(b, a, x, zi):
    b = np.asarray(b, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    order = len(b) - 1
    y = np.empty_like(x)
    z = np.array(zi, dtype=np.float64, copy=True, order="C")
    if order == 0:
        return b[0] * x, z
    # loop over time, vectorised over channels
    zc = [z[:, i].copy() for i in range(order)]
    bl = b.tolist()
    al = a.tolist()
    for t in range(x.shape[0]):
        xn = x[t]
        yn = bl[0] * xn + zc[0]
        for i in range(1, order):
            zc[i - 1] = bl[i] * xn + zc[i] - al[i] * yn
        zc[order - 1] = bl[order] * xn - al[order] * yn
        y[t] = yn
    for i in range(order):
        z[:, i] = zc[i]
    return y, z


def sosfilt_df2t(sos, x, zi):
    """Cascade of second-order sections, rows ``(b0, b1, b2, 1, a1, a2)``.

    ``zi`` is ``(channels, 2 * sections)``. All sections advance together
    along a diagonal wavefront (section ``j`` handles sample ``s - j`` at
    step ``s``), so the Python loop runs ``n + sections - 1`` times instead
    of ``n * sections``. Every sample still sees the same operations as in
    :func:`lfilter_df2t`, hence identical results.
    """
    sos = np.asarray(sos, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    m = sos.shape[0]
    n = x.shape[0]
    zf = np.array(zi, dtype=np.float64, copy=True, order="C")
    if n == 0 or m == 0:
        return x.copy(), zf
    b0, b1, b2 = sos[:, 0:1], sos[:, 1:2], sos[:, 2:3]
    a1, a2 = sos[:, 4:5], sos[:, 5:6]
    z0 = np.ascontiguousarray(zf[:, 0::2].T)
    z1 = np.ascontiguousarray(zf[:, 1::2].T)
    inp = np.zeros((m, x.shape[1]))
    y_out = np.empty_like(x)

    def step(s, lo, hi):
        # generic step on the active sections lo..hi-1 (ramp-up and ramp-down)
        if s < n:
            inp[0] = x[s]
        xi = inp[lo:hi]
        yn = b0[lo:hi] * xi + z0[lo:hi]
        z0[lo:hi] = b1[lo:hi] * xi + z1[lo:hi] - a1[lo:hi] * yn
        z1[lo:hi] = b2[lo:hi] * xi - a2[lo:hi] * yn
        if hi == m:
            y_out[s - m + 1] = yn[-1]
        top = min(hi, m - 1)
        inp[lo + 1:top + 1] = yn[:top - lo]

    for s in range(min(m - 1, n + m - 1)):
        step(s, max(0, s - n + 1), min(m, s + 1))

    # all sections active: same arithmetic on preallocated buffers
    bb = np.stack([b0, b1, b2])
    aa = np.stack([a1, a2])
    p = np.empty((3,) + inp.shape)
    q = np.empty((2,) + inp.shape)
    yn = np.empty_like(inp)
    p0, p1, p2 = p
    q1, q2 = q
    mul, add, sub = np.multiply, np.add, np.subtract
    for s in range(m - 1, n):
        inp[0] = x[s]
        mul(bb, inp, out=p)
        add(p0, z0, out=yn)
        mul(aa, yn, out=q)
        add(p1, z1, out=z0)
        sub(z0, q1, out=z0)
        sub(p2, q2, out=z1)
        y_out[s - m + 1] = yn[-1]
        inp[1:] = yn[:-1]

    for s in range(max(n, m - 1), n + m - 1):
        step(s, max(0, s - n + 1), min(m, s + 1))
    zf[:, 0::2] = z0.T
    zf[:, 1::2] = z1.T
    return y_out, zf
