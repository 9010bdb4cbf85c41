# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled direct-form-II-transposed IIR recursion."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def lfilter_df2t(const double[::1] b, const double[::1] a,
                 const double[:, ::1] x, const double[:, ::1] zi):
    """Filter ``x`` (time x channel) along time.

    ``b`` and ``a`` must have equal length ``order + 1`` with ``a[0] == 1``;
    ``zi`` has shape (channel, order). Returns ``(y, zf)``.
    """
    cdef Py_ssize_t n_time = x.shape[0]
    cdef Py_ssize_t n_ch = x.shape[1]
    cdef Py_ssize_t order = b.shape[0] - 1
    cdef Py_ssize_t t, c, i
    cdef double xn, yn

    y_arr = np.empty((n_time, n_ch), dtype=np.float64)
    z_arr = np.array(zi, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] y = y_arr
    cdef double[:, ::1] z = z_arr

    if order == 0:
        for t in range(n_time):
            for c in range(n_ch):
                y[t, c] = b[0] * x[t, c]
        return y_arr, z_arr

    for t in range(n_time):
        for c in range(n_ch):
            xn = x[t, c]
            yn = b[0] * xn + z[c, 0]
            for i in range(1, order):
                z[c, i - 1] = b[i] * xn + z[c, i] - a[i] * yn
            z[c, order - 1] = b[order] * xn - a[order] * yn
            y[t, c] = yn
    return y_arr, z_arr
