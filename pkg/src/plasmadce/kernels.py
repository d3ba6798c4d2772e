"""Fixed-step RK4 loops for the Bogoliubov master equations.

Coefficients are pre-sampled by the caller at the three RK4 abscissae of
every step (t, t + h/2, t + h), so the loops never call back into Python.
Each loop exists twice: a numba-compiled version and the plain version it
is compiled from (scalar case) or a numpy-matmul version (matrix case).
"""

import numpy as np

from . import _accel


def _rk4_scalar(w, g, h, record, a0, b0):
    n_steps = h.shape[0]
    n_out = 0
    for i in range(record.shape[0]):
        if record[i]:
            n_out += 1
    a_out = np.empty(n_out, dtype=np.complex128)
    b_out = np.empty(n_out, dtype=np.complex128)
    a = a0
    b = b0
    k = 0
    if record[0]:
        a_out[0] = a
        b_out[0] = b
        k = 1
    for n in range(n_steps):
        dt = h[n]
        w0 = w[n, 0]
        w1 = w[n, 1]
        w2 = w[n, 2]
        g0 = g[n, 0]
        g1 = g[n, 1]
        g2 = g[n, 2]
        k1a = -1j * w0 * a + 2.0 * g0 * b
        k1b = 1j * w0 * b + 2.0 * g0.conjugate() * a
        ta = a + 0.5 * dt * k1a
        tb = b + 0.5 * dt * k1b
        k2a = -1j * w1 * ta + 2.0 * g1 * tb
        k2b = 1j * w1 * tb + 2.0 * g1.conjugate() * ta
        ta = a + 0.5 * dt * k2a
        tb = b + 0.5 * dt * k2b
        k3a = -1j * w1 * ta + 2.0 * g1 * tb
        k3b = 1j * w1 * tb + 2.0 * g1.conjugate() * ta
        ta = a + dt * k3a
        tb = b + dt * k3b
        k4a = -1j * w2 * ta + 2.0 * g2 * tb
        k4b = 1j * w2 * tb + 2.0 * g2.conjugate() * ta
        a = a + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        b = b + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
        if record[n + 1]:
            a_out[k] = a
            b_out[k] = b
            k += 1
    return a_out, b_out


def _matmul(x, y):
    n = x.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            acc = 0j
            for m in range(n):
                acc += x[i, m] * y[m, j]
            out[i, j] = acc
    return out


def _rhs_matrix_nb(w, g, a, b):
    # dA = -i W A + 2 g B ;  dB = i W* B + 2 g* A
    da = -1j * _matmul(w, a) + 2.0 * _matmul(g, b)
    db = 1j * _matmul(w.conjugate(), b) + 2.0 * _matmul(g.conjugate(), a)
    return da, db


def _rhs_matrix_np(w, g, a, b):
    da = -1j * (w @ a) + 2.0 * (g @ b)
    db = 1j * (w.conj() @ b) + 2.0 * (g.conj() @ a)
    return da, db


def _make_rk4_matrix(rhs):
    def rk4_matrix(w, g, h, record, a0, b0):
        n_steps = h.shape[0]
        n = a0.shape[0]
        n_out = 0
        for i in range(record.shape[0]):
            if record[i]:
                n_out += 1
        a_out = np.empty((n_out, n, n), dtype=np.complex128)
        b_out = np.empty((n_out, n, n), dtype=np.complex128)
        a = a0.copy()
        b = b0.copy()
        k = 0
        if record[0]:
            a_out[0] = a
            b_out[0] = b
            k = 1
        for s in range(n_steps):
            dt = h[s]
            k1a, k1b = rhs(w[s, 0], g[s, 0], a, b)
            k2a, k2b = rhs(w[s, 1], g[s, 1], a + 0.5 * dt * k1a, b + 0.5 * dt * k1b)
            k3a, k3b = rhs(w[s, 1], g[s, 1], a + 0.5 * dt * k2a, b + 0.5 * dt * k2b)
            k4a, k4b = rhs(w[s, 2], g[s, 2], a + dt * k3a, b + dt * k3b)
            a = a + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
            b = b + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            if record[s + 1]:
                a_out[k] = a
                b_out[k] = b
                k += 1
        return a_out, b_out

    return rk4_matrix


rk4_scalar_numpy = _rk4_scalar
rk4_matrix_numpy = _make_rk4_matrix(_rhs_matrix_np)

if _accel.numba is not None:
    _nb = _accel.numba
    _matmul_jit = _nb.njit(cache=True)(_matmul)

    @_nb.njit(cache=True)
    def _rhs_matrix_jit(w, g, a, b):
        da = -1j * _matmul_jit(w, a) + 2.0 * _matmul_jit(g, b)
        db = 1j * _matmul_jit(np.conj(w), b) + 2.0 * _matmul_jit(np.conj(g), a)
        return da, db

    rk4_scalar_numba = _nb.njit(cache=True)(_rk4_scalar)
    rk4_matrix_numba = _nb.njit(cache=True)(_make_rk4_matrix(_rhs_matrix_jit))
else:  # pragma: no cover
    rk4_scalar_numba = None
    rk4_matrix_numba = None


def select(backend=None):
    """Return ``(scalar_loop, matrix_loop)`` for ``backend``.

    ``backend`` is ``"numba"``, ``"numpy"`` or None (follow the environment flag).
    """
    if backend is None:
        backend = "numba" if _accel.USE_NUMBA else "numpy"
    if backend == "numba":
        if rk4_scalar_numba is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return rk4_scalar_numba, rk4_matrix_numba
    if backend == "numpy":
        return rk4_scalar_numpy, rk4_matrix_numpy
    raise ValueError(f"unknown backend {backend!r}")
