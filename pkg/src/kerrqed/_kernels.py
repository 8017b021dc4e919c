"""Hot loops of the block propagator.

Each kernel exists twice: a loop version compiled with numba and a vectorized
numpy version.  :func:`atom_series` dispatches on ``_accel.USE_NUMBA``.

Block (m1, m2) couples |e, m1, m2> and |g, m1, m2+1> with detuning
G = Delta + 2 chi (m1 + m2) and coupling g = mu_bar sqrt(m2 + 1).  In the
interaction picture of the diagonal Hamiltonian its propagator is::

    u11 = e^{-iGt/2} (cos dt + i G/(2d) sin dt)   u12 = e^{-iGt/2} (-i g sin(dt)/d)
    u21 = e^{+iGt/2} (-i g sin(dt)/d)             u22 = e^{+iGt/2} (cos dt - i G/(2d) sin dt)

with d = sqrt(G^2/4 + g^2).
"""
import math

import numpy as np

from . import _accel
from ._accel import njit

_TIME_CHUNK = 64


def block_elements(G, g, t):
    """(u11, u12, u21, u22) for broadcastable arrays of detuning, coupling and time."""
    G = np.asarray(G, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    d = np.sqrt(0.25 * G * G + g * g)
    dt = d * t
    # sin(d t) / d, finite as d -> 0
    sdt = t * np.sinc(dt / np.pi)
    c = np.cos(dt)
    ph = np.exp(-0.5j * G * t)
    u11 = ph * (c + 0.5j * G * sdt)
    u12 = ph * (-1j * g * sdt)
    u21 = np.conj(ph) * (-1j * g * sdt)
    u22 = np.conj(ph) * (c - 0.5j * G * sdt)
    return u11, u12, u21, u22


def _grids(n1, n2, delta, chi, mu_bar):
    m1 = np.arange(n1)[:, None]
    m2 = np.arange(n2 - 1)[None, :]
    G = delta + 2.0 * chi * (m1 + m2)
    g = np.broadcast_to(mu_bar * np.sqrt(m2 + 1.0), G.shape)
    return G, g


def apply_blocks(ce, cg, t, delta, chi, mu_bar):
    """Evolve excited/ground amplitude arrays of shape (n1, n2, ...) to time ``t``.

    Unpaired amplitudes (|g, m1, 0> and the truncation edge |e, m1, n2-1>) are
    left unchanged.
    """
    n1, n2 = ce.shape[:2]
    ce_out = np.array(ce, dtype=np.complex128, copy=True)
    cg_out = np.array(cg, dtype=np.complex128, copy=True)
    if n2 < 2:
        return ce_out, cg_out
    G, g = _grids(n1, n2, delta, chi, mu_bar)
    u11, u12, u21, u22 = block_elements(G, g, t)
    extra = (slice(None),) * 2 + (None,) * (ce.ndim - 2)
    u11, u12, u21, u22 = u11[extra], u12[extra], u21[extra], u22[extra]
    a = ce[:, :-1]
    b = cg[:, 1:]
    ce_out[:, :-1] = u11 * a + u12 * b
    cg_out[:, 1:] = u21 * a + u22 * b
    return ce_out, cg_out


def atom_series_numpy(ce, cg, times, delta, chi, mu_bar):
    """Excited population and atomic coherence rho_eg along ``times``."""
    times = np.asarray(times, dtype=np.float64)
    n1, n2 = ce.shape
    pe = np.empty(times.size)
    coh = np.empty(times.size, dtype=np.complex128)
    if n2 < 2:
        pe[:] = np.sum(np.abs(ce) ** 2)
        coh[:] = np.sum(ce * np.conj(cg))
        return pe, coh
    G, g = _grids(n1, n2, delta, chi, mu_bar)
    a = ce[None, :, :-1]
    b = cg[None, :, 1:]
    edge_e = ce[None, :, -1]
    dark_g = cg[None, :, 0]
    for start in range(0, times.size, _TIME_CHUNK):
        t = times[start:start + _TIME_CHUNK, None, None]
        u11, u12, u21, u22 = block_elements(G[None], g[None], t)
        e_new = u11 * a + u12 * b          # e at (m1, 0..n2-2)
        g_new = u21 * a + u22 * b          # g at (m1, 1..n2-1)
        sl = slice(start, start + t.shape[0])
        pe[sl] = np.sum(np.abs(e_new) ** 2, axis=(1, 2)) + np.sum(np.abs(edge_e) ** 2, axis=1)
        # rho_eg = sum_f psi_e(f) psi_g(f)^*, pairing e and g at the same (m1, m2)
        coh[sl] = (np.sum(e_new[:, :, 1:] * np.conj(g_new[:, :, :-1]), axis=(1, 2))
                   + np.sum(e_new[:, :, 0] * np.conj(dark_g), axis=1)
                   + np.sum(edge_e * np.conj(g_new[:, :, -1]), axis=1))
    return pe, coh


@njit
def atom_series_loop(ce, cg, times, delta, chi, mu_bar):
    n1, n2 = ce.shape
    nt = times.shape[0]
    pe = np.empty(nt)
    coh = np.empty(nt, dtype=np.complex128)
    e_row = np.empty(n2, dtype=np.complex128)
    g_row = np.empty(n2, dtype=np.complex128)
    for it in range(nt):
        t = times[it]
        pe_acc = 0.0
        coh_acc = 0.0 + 0.0j
        for m1 in range(n1):
            g_row[0] = cg[m1, 0]
            e_row[n2 - 1] = ce[m1, n2 - 1]
            for m2 in range(n2 - 1):
                G = delta + 2.0 * chi * (m1 + m2)
                g = mu_bar * math.sqrt(m2 + 1.0)
                d = math.sqrt(0.25 * G * G + g * g)
                dt = d * t
                c = math.cos(dt)
                if d > 0.0:
                    sdt = math.sin(dt) / d
                else:
                    sdt = t
                ph = complex(math.cos(0.5 * G * t), -math.sin(0.5 * G * t))
                u11 = ph * complex(c, 0.5 * G * sdt)
                u12 = ph * complex(0.0, -g * sdt)
                u21 = ph.conjugate() * complex(0.0, -g * sdt)
                u22 = ph.conjugate() * complex(c, -0.5 * G * sdt)
                a = ce[m1, m2]
                b = cg[m1, m2 + 1]
                e_row[m2] = u11 * a + u12 * b
                g_row[m2 + 1] = u21 * a + u22 * b
            for m2 in range(n2):
                pe_acc += e_row[m2].real ** 2 + e_row[m2].imag ** 2
                coh_acc += e_row[m2] * g_row[m2].conjugate()
        pe[it] = pe_acc
        coh[it] = coh_acc
    return pe, coh


def atom_series(ce, cg, times, delta, chi, mu_bar):
    ce = np.ascontiguousarray(ce, dtype=np.complex128)
    cg = np.ascontiguousarray(cg, dtype=np.complex128)
    times = np.ascontiguousarray(times, dtype=np.float64)
    if _accel.USE_NUMBA:
        return atom_series_loop(ce, cg, times, float(delta), float(chi), float(mu_bar))
    return atom_series_numpy(ce, cg, times, delta, chi, mu_bar)
