"""Pure-numpy implementations of the hot kernels.

Used when the compiled ``_core`` extension is unavailable, or when the
environment variable ``GINPROD_PURE=1`` is set.  Both backends must agree to
rounding level; ``tests/test_core.py`` checks this.
"""
import numpy as np

LANCZOS_G = 7.0
LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
HALF_LOG_TWO_PI = 0.5 * np.log(2.0 * np.pi)
# Lanczos is applied at Re z >= SHIFT_TO; smaller arguments are shifted up,
# and arguments left of REFLECT_BELOW go through the reflection formula.
SHIFT_TO = 8.0
REFLECT_BELOW = -8.0


def _lanczos(z):
    # log Gamma(z) for Re z >= SHIFT_TO (principal branch)
    zm = z - 1.0
    acc = np.full_like(zm, LANCZOS_COEF[0])
    for k in range(1, len(LANCZOS_COEF)):
        acc = acc + LANCZOS_COEF[k] / (zm + k)
    t = zm + LANCZOS_G + 0.5
    return HALF_LOG_TWO_PI + (zm + 0.5) * np.log(t) - t + np.log(acc)


def _log_sin_pi(z):
    up = z.imag >= 0
    w = np.where(up, z, np.conj(z))
    v = -1j * np.pi * w + np.log((np.exp(2j * np.pi * w) - 1.0) / 2j)
    return np.where(up, v, np.conj(v))


def loggamma(z):
    z = np.asarray(z, dtype=complex)
    out_shape = z.shape
    z = z.ravel()
    left = z.real < REFLECT_BELOW
    if np.any(left):
        out = np.empty_like(z)
        out[~left] = _shifted(z[~left])
        zl = z[left]
        refl = np.log(np.pi) - _log_sin_pi(zl) - _shifted(1.0 - zl)
        stir = (zl - 0.5) * np.log(zl) - zl
        k = np.round((stir.imag - refl.imag) / (2 * np.pi))
        out[left] = refl + 2j * np.pi * k
        return out.reshape(out_shape)
    return _shifted(z).reshape(out_shape)


def _shifted(z):
    if z.size == 0:
        return z.copy()
    nshift = np.maximum(np.ceil(SHIFT_TO - z.real), 0).astype(np.int64)
    res = _lanczos(z + nshift)
    kmax = int(nshift.max()) if nshift.size else 0
    for k in range(kmax):
        mask = nshift > k
        res[mask] -= np.log(z[mask] + k)
    return res


def cauchy_bilinear(a, u, b, t):
    """sum_ij a_i b_j / (u_i - t_j), blocked to bound memory."""
    a = np.asarray(a, dtype=complex)
    u = np.asarray(u, dtype=complex)
    b = np.asarray(b, dtype=complex)
    t = np.asarray(t, dtype=complex)
    total = 0.0 + 0.0j
    block = max(1, 2_000_000 // max(len(t), 1))
    for s in range(0, len(u), block):
        m = 1.0 / (u[s:s + block, None] - t[None, :])
        total += a[s:s + block] @ (m @ b)
    return total


def cauchy_matrix_apply(u, t, b):
    """Return the vector v_i = sum_j b_jk / (u_i - t_j) for a 2-d ``b`` (columns k)."""
    u = np.asarray(u, dtype=complex)
    t = np.asarray(t, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.empty((len(u),) + b.shape[1:], dtype=complex)
    block = max(1, 2_000_000 // max(len(t), 1))
    for s in range(0, len(u), block):
        out[s:s + block] = (1.0 / (u[s:s + block, None] - t[None, :])) @ b
    return out
