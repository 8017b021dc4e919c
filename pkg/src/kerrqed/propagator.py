"""Exact rotated-frame evolution built from independent 2x2 blocks.

With mu1 = 0 the rotated Hamiltonian conserves the mode-1 photon number and
the mode-2 excitation number (photons plus atomic excitation), so it splits
into blocks {|e, m1, m2>, |g, m1, m2+1>}.  Evolution here is in the
interaction picture of the diagonal part

    H0 = Omega1 n1 + Omega2 n2 + chi (N^2 - N) + (omega0 / 2) sigma_z,  N = n1 + n2,

which is a product of field-local and atom-local unitaries, so reduced-state
spectra, inversion and concurrence do not depend on the picture.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidInputError
from .hilbert import ATOM_DIM, DensityMatrix, PureState
from .model import TransformedParams

_MU1_TOL = 1e-9


@dataclass(frozen=True)
class BlockFrequencies:
    """Generalized Rabi frequencies and Kerr-shifted detunings of block (m1, m2)."""

    delta_plus: float
    delta_minus: float
    Gamma: float
    Gamma_prime: float
    m1: int
    m2: int


@dataclass(frozen=True, eq=False)
class BlockPropagator:
    """2x2 unitary on (|e, m1, m2>, |g, m1, m2+1>) at time ``t``."""

    u: np.ndarray
    t: float
    m1: int
    m2: int


def block_frequencies(m1: int, m2: int, p: TransformedParams) -> BlockFrequencies:
    """Tabulated frequencies with Gamma = Delta + 2 chi (m1 + m2 - 1).

    The detuning that actually drives block (m1, m2) is
    :func:`block_detuning`, equal to ``Gamma`` evaluated at (m1 + 1, m2).
    """
    if m1 < 0 or m2 < 0:
        raise InvalidInputError("Fock indices must be non-negative")
    gamma = p.Delta + 2.0 * p.chi * (m1 + m2 - 1)
    gamma_p = p.Delta + 2.0 * p.chi * (m1 + m2 - 2)
    dp = math.sqrt(0.25 * gamma ** 2 + p.mu_bar ** 2 * (m2 + 1))
    dm = math.sqrt(0.25 * gamma ** 2 + p.mu_bar ** 2 * m2)
    return BlockFrequencies(dp, dm, gamma, gamma_p, m1, m2)


def block_detuning(m1, m2, p: TransformedParams):
    """E_g - E_e for block (m1, m2) of the rotated Hamiltonian."""
    return p.Delta + 2.0 * p.chi * (np.asarray(m1) + np.asarray(m2))


def rabi_frequency(m1, m2, p: TransformedParams):
    """Half the splitting of block (m1, m2): sqrt(G^2/4 + mu_bar^2 (m2 + 1))."""
    G = block_detuning(m1, m2, p)
    return np.sqrt(0.25 * G ** 2 + p.mu_bar ** 2 * (np.asarray(m2) + 1.0))


def block_u(m1: int, m2: int, t: float, p: TransformedParams) -> BlockPropagator:
    if t < 0:
        raise InvalidInputError("time must be non-negative")
    if m1 < 0 or m2 < 0:
        raise InvalidInputError("Fock indices must be non-negative")
    G = block_detuning(m1, m2, p)
    g = p.mu_bar * math.sqrt(m2 + 1.0)
    u11, u12, u21, u22 = _kernels.block_elements(G, g, t)
    u = np.array([[u11, u12], [u21, u22]], dtype=np.complex128)
    u.setflags(write=False)
    return BlockPropagator(u, float(t), m1, m2)


def block_u_batch(m1, m2, t, p: TransformedParams) -> np.ndarray:
    """Vectorized :func:`block_u`; returns shape broadcast(m1, m2, t) + (2, 2)."""
    m1, m2, t = np.broadcast_arrays(np.asarray(m1), np.asarray(m2), np.asarray(t, dtype=float))
    G = block_detuning(m1, m2, p)
    g = p.mu_bar * np.sqrt(m2 + 1.0)
    u11, u12, u21, u22 = _kernels.block_elements(G, g, t)
    return np.stack([np.stack([u11, u12], -1), np.stack([u21, u22], -1)], -2)


def printed_block_row(m1, m2, t, p: TransformedParams):
    """First row (U11, U12) in the tabulated closed form, using the detuning that
    drives the block.  Differs from :func:`block_u` by the row phase e^{-iGt/2}."""
    G = float(block_detuning(m1, m2, p))
    d = float(rabi_frequency(m1, m2, p))
    ph = np.exp(-1j * G * t)
    s = t * np.sinc(d * t / np.pi)
    u11 = (math.cos(d * t) + 0.5j * G * s) * ph
    u12 = -1j * p.mu_bar * math.sqrt(m2 + 1.0) * s * ph
    return u11, u12


def _check_decoupled(p: TransformedParams):
    if abs(p.mu1) > _MU1_TOL * max(1.0, p.mu_bar):
        raise InvalidInputError(
            f"block propagation needs mu1 = 0 (got {p.mu1:.3g}); use the balanced lambda "
            "and the decouple_mode1 angle")


def _split(tensor):
    return tensor[0], tensor[1]


def evolve_pure(state: PureState, t: float, p: TransformedParams) -> PureState:
    """Interaction-picture state at time ``t`` (rotated-frame input)."""
    _check_decoupled(p)
    if t < 0:
        raise InvalidInputError("time must be non-negative")
    ce, cg = _split(state.tensor)
    ce, cg = _kernels.apply_blocks(ce, cg, t, p.Delta, p.chi, p.mu_bar)
    return PureState(state.dims, np.stack([ce, cg]))


def evolve_density(rho: DensityMatrix, t: float, p: TransformedParams) -> DensityMatrix:
    """U(t) rho U(t)^dag on the (atom, m1, m2) factorization."""
    _check_decoupled(p)
    if len(rho.dims) != 3 or rho.dims[0] != ATOM_DIM:
        raise InvalidInputError("density matrix must be over (atom, mode1, mode2)")
    dims = rho.dims
    cols = rho.matrix.reshape(dims + (-1,))
    ce, cg = _kernels.apply_blocks(cols[0], cols[1], t, p.Delta, p.chi, p.mu_bar)
    half = np.stack([ce, cg]).reshape(rho.dim, rho.dim)
    # U (U rho)^dag = U rho U^dag for Hermitian rho
    rows = half.conj().T.reshape(dims + (-1,))
    ce, cg = _kernels.apply_blocks(rows[0], rows[1], t, p.Delta, p.chi, p.mu_bar)
    full = np.stack([ce, cg]).reshape(rho.dim, rho.dim)
    return DensityMatrix(dims, 0.5 * (full + full.conj().T))


def diagonal_energies(dims, p: TransformedParams) -> np.ndarray:
    """Diagonal of H0 over (atom, m1, m2)."""
    _, n1, n2 = dims
    m1 = np.arange(n1)[:, None]
    m2 = np.arange(n2)[None, :]
    n = m1 + m2
    field = p.Omega1 * m1 + p.Omega2 * m2 + p.chi * (n * n - n)
    return np.stack([field + 0.5 * p.omega0, field - 0.5 * p.omega0])


def to_schrodinger(state: PureState, t: float, p: TransformedParams) -> PureState:
    """Apply e^{-i H0 t}: interaction picture -> Schrodinger picture."""
    phase = np.exp(-1j * diagonal_energies(state.dims, p) * t)
    return PureState(state.dims, state.tensor * phase)


def to_interaction(state: PureState, t: float, p: TransformedParams) -> PureState:
    phase = np.exp(1j * diagonal_energies(state.dims, p) * t)
    return PureState(state.dims, state.tensor * phase)


def atom_series(state: PureState, times, p: TransformedParams):
    """Excited population and rho_eg of the reduced atom along ``times``.

    Interaction picture; populations and |rho_eg| are picture invariant.
    """
    _check_decoupled(p)
    ce, cg = _split(state.tensor)
    return _kernels.atom_series(ce, cg, times, p.Delta, p.chi, p.mu_bar)


def four_level_rho(t: float, gamma: float, p: TransformedParams) -> DensityMatrix:
    """Evolved gamma|0,1;e><.| + (1-gamma)|0,1;g><.| in the basis
    (|01,e>, |01,g>, |00,e>, |02,g>)."""
    if not 0.0 <= gamma <= 1.0:
        raise InvalidInputError("gamma must lie in [0, 1]")
    _check_decoupled(p)
    # |01,e> lives in block (0,1) with partner |02,g>; |01,g> in block (0,0) with |00,e>
    ua = block_u(0, 1, t, p).u
    ub = block_u(0, 0, t, p).u
    psi_a = np.array([ua[0, 0], 0.0, 0.0, ua[1, 0]])
    psi_b = np.array([0.0, ub[1, 1], ub[0, 1], 0.0])
    mat = gamma * np.outer(psi_a, psi_a.conj()) + (1.0 - gamma) * np.outer(psi_b, psi_b.conj())
    return DensityMatrix((2, 2), mat)
