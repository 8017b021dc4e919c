"""Brute-force propagation on truncated Fock bases.

Hamiltonians are assembled as dense Hermitian matrices over (atom, m1, m2) and
propagated through their eigendecomposition, one decomposition per Hamiltonian.
:func:`spectral` first splits the matrix into the connected components of its
sparsity graph (invariant subspaces such as fixed excitation number) and runs a
dense ``eigh`` on each; ``method="dense"`` diagonalizes the whole matrix at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import InvalidInputError, NumericFailureError
from .hilbert import ATOM_DIM, PureState
from .model import RawParams, TransformedParams

ORIGINAL = "original"
TRANSFORMED = "transformed"

_BYTES_C128 = 16
_TIME_CHUNK = 256


@dataclass(frozen=True, eq=False)
class TruncatedHamiltonian:
    matrix: np.ndarray
    dims: tuple
    frame: str

    def __post_init__(self):
        d = int(np.prod(self.dims))
        if self.matrix.shape != (d, d):
            raise InvalidInputError(f"matrix shape {self.matrix.shape} does not match dims {self.dims}")
        self.matrix.setflags(write=False)

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralBlock:
    indices: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigen-decomposition stored per invariant block."""

    dims: tuple
    blocks: Sequence[SpectralBlock]

    @property
    def dim(self):
        return int(np.prod(self.dims))

    @property
    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues, ascending."""
        vals = np.concatenate([b.eigenvalues for b in self.blocks])
        return np.sort(vals)

    @property
    def eigenvectors(self) -> np.ndarray:
        """Dense unitary whose columns match :attr:`eigenvalues`."""
        d = self.dim
        vecs = np.zeros((d, d), dtype=np.complex128)
        vals = np.empty(d)
        col = 0
        for b in self.blocks:
            k = b.eigenvalues.size
            vecs[np.ix_(b.indices, np.arange(col, col + k))] = b.eigenvectors
            vals[col:col + k] = b.eigenvalues
            col += k
        order = np.argsort(vals, kind="stable")
        return vecs[:, order]


def _ladder(n):
    return sparse.diags(np.sqrt(np.arange(1, n, dtype=np.float64)), 1, format="csr")


def _operators(n1, n2):
    i_atom, i1, i2 = sparse.identity(ATOM_DIM), sparse.identity(n1), sparse.identity(n2)
    a1 = sparse.kron(i_atom, sparse.kron(_ladder(n1), i2), format="csr")
    a2 = sparse.kron(i_atom, sparse.kron(i1, _ladder(n2)), format="csr")
    field_id = sparse.identity(n1 * n2)
    sp = sparse.kron(sparse.csr_matrix([[0.0, 1.0], [0.0, 0.0]]), field_id, format="csr")
    sz = sparse.kron(sparse.diags([1.0, -1.0]), field_id, format="csr")
    return a1, a2, sp, sz


def _check_dims(n1_dim, n2_dim):
    if n1_dim < 2 or n2_dim < 2:
        raise InvalidInputError("each mode needs at least two Fock levels")


def _assemble(omega, kerr_self, kerr_cross, lam, omega0, couplings, n1_dim, n2_dim):
    a1, a2, sp, sz = _operators(n1_dim, n2_dim)
    n1 = a1.T @ a1
    n2 = a2.T @ a2
    h = (omega[0] * n1 + omega[1] * n2
         + kerr_self[0] * (a1.T @ a1.T @ a1 @ a1) + kerr_self[1] * (a2.T @ a2.T @ a2 @ a2)
         + kerr_cross * (n1 @ n2)
         + lam * (a1.T @ a2 + a2.T @ a1)
         + 0.5 * omega0 * sz)
    for g, a in zip(couplings, (a1, a2)):
        h = h + g * (a @ sp + a.T @ sp.T)
    return h.toarray().astype(np.complex128)


def build_original(raw: RawParams, n1_dim: int, n2_dim: int) -> TruncatedHamiltonian:
    """Laboratory-frame Hamiltonian on a truncated Fock basis."""
    _check_dims(n1_dim, n2_dim)
    h = _assemble((raw.omega1, raw.omega2), (raw.chi1, raw.chi2), raw.chi_bar, raw.lam,
                  raw.omega0, (raw.lambda1, raw.lambda2), n1_dim, n2_dim)
    return TruncatedHamiltonian(h, (ATOM_DIM, n1_dim, n2_dim), ORIGINAL)


def build_transformed(p: TransformedParams, n1_dim: int, n2_dim: int) -> TruncatedHamiltonian:
    """Rotated-frame Hamiltonian (no mode-mode term, common Kerr chi, cross term 2 chi)."""
    _check_dims(n1_dim, n2_dim)
    h = _assemble((p.Omega1, p.Omega2), (p.chi, p.chi), 2.0 * p.chi, 0.0,
                  p.omega0, (p.mu1, p.mu2), n1_dim, n2_dim)
    return TruncatedHamiltonian(h, (ATOM_DIM, n1_dim, n2_dim), TRANSFORMED)


def _eigh(mat):
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"eigensolver failed: {exc}") from exc
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(vecs))):
        raise NumericFailureError("eigensolver returned non-finite values")
    return vals, vecs


def spectral(H: TruncatedHamiltonian, method: str = "blocks") -> SpectralDecomposition:
    """Full Hermitian eigendecomposition of ``H``."""
    mat = H.matrix
    if method == "dense":
        vals, vecs = _eigh(mat)
        blocks = [SpectralBlock(np.arange(H.dim), vals, vecs)]
        return SpectralDecomposition(H.dims, blocks)
    if method != "blocks":
        raise InvalidInputError(f"unknown method {method!r}")
    n_comp, labels = csgraph.connected_components(sparse.csr_matrix(mat != 0.0), directed=False)
    blocks = []
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        vals, vecs = _eigh(mat[np.ix_(idx, idx)])
        blocks.append(SpectralBlock(idx, vals, vecs))
    return SpectralDecomposition(H.dims, blocks)


def _check_state(dec, state):
    if tuple(state.dims) != tuple(dec.dims):
        raise InvalidInputError(f"state dims {state.dims} do not match Hamiltonian dims {dec.dims}")


def propagate(dec: SpectralDecomposition, state: PureState, t: float) -> PureState:
    """V exp(-i Lambda t) V^dag psi."""
    _check_state(dec, state)
    return PureState(state.dims, propagate_series(dec, state, [t])[0])


def propagate_chunks(dec: SpectralDecomposition, state: PureState, times, chunk=_TIME_CHUNK):
    """Yield ``(slice, amplitudes)`` over consecutive chunks of ``times``.

    Blocks the state does not populate are skipped.
    """
    _check_state(dec, state)
    times = np.asarray(times, dtype=np.float64)
    psi = state.amps
    active = []
    for b in dec.blocks:
        local = psi[b.indices]
        if np.any(local):
            active.append((b, b.eigenvectors.conj().T @ local))
    for start in range(0, times.size, chunk):
        t = times[start:start + chunk]
        out = np.zeros((t.size, psi.size), dtype=np.complex128)
        for b, coeff in active:
            phases = np.exp(-1j * np.outer(t, b.eigenvalues)) * coeff
            out[:, b.indices] = phases @ b.eigenvectors.T
        yield slice(start, start + t.size), out


def propagate_series(dec: SpectralDecomposition, state: PureState, times) -> np.ndarray:
    """Amplitudes at each time, shape (len(times), dim)."""
    times = np.asarray(times, dtype=np.float64)
    out = np.empty((times.size, state.dim), dtype=np.complex128)
    for sl, amps in propagate_chunks(dec, state, times):
        out[sl] = amps
    return out


def energy(H: TruncatedHamiltonian, amps) -> float:
    amps = np.asarray(amps)
    return float(np.vdot(amps, H.matrix @ amps).real)


def memory_estimate_mb(n1_dim: int, n2_dim: int, n_times: int = 0) -> float:
    """Peak working set of an oracle run: operator matrices plus one chunk of states."""
    d = ATOM_DIM * n1_dim * n2_dim
    # dense H, its boolean sparsity mask and the real-to-complex copy
    matrices = 2.5 * d * d * _BYTES_C128
    states = 2 * min(n_times, _TIME_CHUNK) * d * _BYTES_C128
    return (matrices + states) / 2 ** 20
