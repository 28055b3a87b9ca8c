# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: complex log-gamma and Cauchy-type bilinear sums."""
import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, log as rlog

cdef extern from "complex.h" nogil:
    double complex clog(double complex)
    double complex cexp(double complex)
    double complex conj(double complex)

cdef double LANCZOS_G = 7.0
cdef double[9] COEF = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]
cdef double HALF_LOG_TWO_PI = 0.91893853320467274178
cdef double SHIFT_TO = 8.0
cdef double REFLECT_BELOW = -8.0
cdef double PI = 3.14159265358979323846
cdef double LOG_PI = 1.14472988584940017414

cnp.import_array()


cdef inline double complex _log_sin_pi(double complex z) nogil:
    cdef bint up = z.imag >= 0
    cdef double complex w = z if up else conj(z)
    cdef double complex v = -1j * PI * w + clog((cexp(2j * PI * w) - 1.0) / 2j)
    return v if up else conj(v)


cdef inline double complex _lgamma_one(double complex z) nogil:
    cdef double complex refl, stir
    cdef double k2
    if z.real < REFLECT_BELOW:
        refl = LOG_PI - _log_sin_pi(z) - _lgamma_one(1.0 - z)
        # pick the 2 pi i multiple that continues the principal branch
        stir = (z - 0.5) * clog(z) - z
        k2 = (stir.imag - refl.imag) / (2.0 * PI)
        k2 = <double>(<long>(k2 + (0.5 if k2 >= 0 else -0.5)))
        return refl + 2j * PI * k2
    return _lgamma_shift(z)


cdef inline double complex _lgamma_shift(double complex z) nogil:
    cdef int nshift = 0
    cdef int k
    cdef double complex corr = 0
    cdef double complex zm, acc, t
    if z.real < SHIFT_TO:
        nshift = <int>ceil(SHIFT_TO - z.real)
        for k in range(nshift):
            corr = corr + clog(z + k)
        z = z + nshift
    zm = z - 1.0
    acc = COEF[0]
    for k in range(1, 9):
        acc = acc + COEF[k] / (zm + k)
    t = zm + LANCZOS_G + 0.5
    return HALF_LOG_TWO_PI + (zm + 0.5) * clog(t) - t + clog(acc) - corr


def loggamma(z):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] zz
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out
    cdef Py_ssize_t i, n
    arr = np.asarray(z, dtype=np.complex128)
    shape = arr.shape
    zz = np.ascontiguousarray(arr.ravel())
    n = zz.shape[0]
    out = np.empty(n, dtype=np.complex128)
    with nogil:
        for i in range(n):
            out[i] = _lgamma_one(zz[i])
    return out.reshape(shape)


cdef void _recip_block(double[::1] u, double[::1] t, Py_ssize_t lo, Py_ssize_t hi,
                       double[:, ::1] out) nogil:
    """out[i-lo, 2j:2j+2] = 1/(u_i - t_j) for interleaved (re, im) storage."""
    cdef Py_ssize_t i, j, nt = t.shape[0] // 2
    cdef double dr, di, s
    for i in range(lo, hi):
        for j in range(nt):
            dr = u[2 * i] - t[2 * j]
            di = u[2 * i + 1] - t[2 * j + 1]
            s = dr * dr + di * di
            out[i - lo, 2 * j] = dr / s
            out[i - lo, 2 * j + 1] = -di / s


def _interleaved(x):
    return np.ascontiguousarray(x, dtype=np.complex128).ravel().view(np.float64)


def cauchy_bilinear(a, u, b, t):
    """sum_ij a_i b_j / (u_i - t_j)."""
    cdef double[::1] aa = _interleaved(a)
    cdef double[::1] uu = _interleaved(u)
    cdef double[::1] bb = _interleaved(b)
    cdef double[::1] tt = _interleaved(t)
    cdef Py_ssize_t i, j, nu = uu.shape[0] // 2, nt = tt.shape[0] // 2
    cdef double dr, di, s, rr, ri, br, bi, row_r, row_i, tot_r = 0.0, tot_i = 0.0
    with nogil:
        for i in range(nu):
            row_r = 0.0
            row_i = 0.0
            for j in range(nt):
                dr = uu[2 * i] - tt[2 * j]
                di = uu[2 * i + 1] - tt[2 * j + 1]
                s = dr * dr + di * di
                rr = dr / s
                ri = -di / s
                br = bb[2 * j]
                bi = bb[2 * j + 1]
                row_r = row_r + br * rr - bi * ri
                row_i = row_i + br * ri + bi * rr
            tot_r = tot_r + aa[2 * i] * row_r - aa[2 * i + 1] * row_i
            tot_i = tot_i + aa[2 * i] * row_i + aa[2 * i + 1] * row_r
    return complex(tot_r, tot_i)


def cauchy_matrix_apply(u, t, b):
    """v_ik = sum_j b_jk / (u_i - t_j).  The reciprocal matrix is formed
    blockwise in C and multiplied by BLAS."""
    cdef double[::1] uu = _interleaved(u)
    cdef double[::1] tt = _interleaved(t)
    barr = np.asarray(b, dtype=np.complex128)
    squeeze = barr.ndim == 1
    b2 = np.ascontiguousarray(barr.reshape(barr.shape[0], -1))
    cdef Py_ssize_t lo, hi, nu = uu.shape[0] // 2, nt = tt.shape[0] // 2, nk = b2.shape[1]
    cdef Py_ssize_t block = max(1, 1_000_000 // max(nt, 1))
    out = np.empty((nu, nk), dtype=np.complex128)
    rbuf = np.empty((min(block, max(nu, 1)), nt), dtype=np.complex128)
    cdef double[:, ::1] rb = rbuf.view(np.float64)
    for lo in range(0, nu, block):
        hi = min(lo + block, nu)
        with nogil:
            _recip_block(uu, tt, lo, hi, rb)
        np.dot(rbuf[:hi - lo], b2, out=out[lo:hi])
    return out[:, 0] if squeeze else out.reshape((nu,) + barr.shape[1:])
