"""Finite Hilbert-space primitives for the atom + two-mode field.

Basis ordering is row-major over (atom, m1, m2) with the atom slowest, so a
flat index is ``atom * n1 * n2 + m1 * n2 + m2``.  Atom index 0 is the excited
state |e>, index 1 the ground state |g>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import special, stats

from .errors import InvalidInputError

ATOM_DIM = 2
EXCITED = 0
GROUND = 1

NORM_TOL = 1e-10
FACTOR_TOL = 1e-8
PSD_TOL = 1e-8
# eigvalsh on construction is skipped above this dimension
PSD_CHECK_MAX_DIM = 512


class Subsystem(IntEnum):
    ATOM = 0
    MODE1 = 1
    MODE2 = 2


def _frozen(arr):
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector over atom (x) mode1 (x) mode2.

    ``amps`` is stored flat; :attr:`tensor` gives the (2, n1, n2) view.
    """

    dims: tuple
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or dims[0] != ATOM_DIM or min(dims) < 1:
            raise InvalidInputError(f"dims must be (2, n1, n2) with n1, n2 >= 1, got {self.dims}")
        amps = _frozen(np.ravel(self.amps))
        if amps.size != math.prod(dims):
            raise InvalidInputError(f"amplitude length {amps.size} does not match dims {dims}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidInputError(f"state not normalized (|psi|^2 = {norm!r})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps, dims, normalize=True):
        amps = np.asarray(amps, dtype=np.complex128).ravel()
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0.0:
                raise InvalidInputError("zero vector cannot be normalized")
            amps = amps / norm
        return cls(tuple(dims), amps)

    @property
    def tensor(self):
        return self.amps.reshape(self.dims)

    @property
    def dim(self):
        return self.amps.size

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def to_density(self):
        return DensityMatrix(self.dims, np.outer(self.amps, self.amps.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over ``dims``.

    Hermiticity and trace are checked on construction.  Positivity is checked
    for dimensions up to ``PSD_CHECK_MAX_DIM``; call :meth:`validate` to force it.
    """

    dims: tuple
    matrix: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or min(dims) < 1:
            raise InvalidInputError(f"invalid factor dimensions {self.dims}")
        mat = _frozen(self.matrix)
        d = math.prod(dims)
        if mat.shape != (d, d):
            raise InvalidInputError(f"matrix shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)
        self._check(psd=d <= PSD_CHECK_MAX_DIM)

    def _check(self, psd):
        mat = self.matrix
        herm = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
        if herm > NORM_TOL:
            raise InvalidInputError(f"density matrix not Hermitian (max deviation {herm:.3g})")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > NORM_TOL:
            raise InvalidInputError(f"density matrix trace {tr!r} != 1")
        if psd:
            lowest = np.linalg.eigvalsh(mat)[0]
            if lowest < -PSD_TOL:
                raise InvalidInputError(f"density matrix has negative eigenvalue {lowest:.3g}")

    def validate(self):
        self._check(psd=True)
        return self

    @property
    def dim(self):
        return self.matrix.shape[0]

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def _normalized_factor(vec, name):
    vec = np.asarray(vec, dtype=np.complex128).ravel()
    norm2 = float(np.vdot(vec, vec).real)
    if vec.size == 0 or norm2 == 0.0:
        raise InvalidInputError(f"{name} factor is the zero vector")
    if abs(norm2 - 1.0) > FACTOR_TOL:
        raise InvalidInputError(f"{name} factor not normalized (|v|^2 = {norm2!r})")
    return vec


def tensor_state(atom_amps, f1_amps, f2_amps) -> PureState:
    """Product state a(atom) f1(m1) f2(m2)."""
    atom = _normalized_factor(atom_amps, "atom")
    if atom.size != ATOM_DIM:
        raise InvalidInputError("atom factor must have two amplitudes (e, g)")
    f1 = _normalized_factor(f1_amps, "mode-1")
    f2 = _normalized_factor(f2_amps, "mode-2")
    amps = np.einsum("a,i,j->aij", atom, f1, f2)
    return PureState.from_amplitudes(amps, (ATOM_DIM, f1.size, f2.size))


def atom_vector(label) -> np.ndarray:
    """Atomic amplitudes for ``"e"``, ``"g"`` or ``"plus"`` = (|e> + |g>)/sqrt(2)."""
    if label == "e":
        return np.array([1.0, 0.0], dtype=np.complex128)
    if label == "g":
        return np.array([0.0, 1.0], dtype=np.complex128)
    if label == "plus":
        return np.array([1.0, 1.0], dtype=np.complex128) / math.sqrt(2.0)
    raise InvalidInputError(f"unknown atomic state {label!r}")


def fock_vector(m, dim) -> np.ndarray:
    if not 0 <= m < dim:
        raise InvalidInputError(f"Fock index {m} outside truncation of dimension {dim}")
    vec = np.zeros(dim, dtype=np.complex128)
    vec[m] = 1.0
    return vec


def fock_state(atom, m1, m2, dims=None) -> PureState:
    """|atom; m1, m2> in a truncation of ``dims`` (default: just large enough)."""
    n1, n2 = (m1 + 1, m2 + 1) if dims is None else (dims[-2], dims[-1])
    vec = atom_vector(atom) if isinstance(atom, str) else np.asarray(atom, dtype=np.complex128)
    return tensor_state(vec, fock_vector(m1, n1), fock_vector(m2, n2))


def default_n_max(n_bar) -> int:
    """Default coherent-state cutoff: ceil(n + 6 sqrt(n) + 10)."""
    n_bar = float(n_bar)
    return int(math.ceil(n_bar + 6.0 * math.sqrt(n_bar) + 10.0))


class CoherentAmplitudes(NamedTuple):
    amplitudes: np.ndarray
    truncated_mass: float


def coherent_amplitudes(alpha, n_max=None) -> CoherentAmplitudes:
    """Fock amplitudes of |alpha> for m = 0..n_max, renormalized.

    ``truncated_mass`` is the Poisson weight discarded above ``n_max``.
    """
    alpha = complex(alpha)
    n_bar = abs(alpha) ** 2
    if n_max is None:
        n_max = default_n_max(n_bar)
    if n_max < 0:
        raise InvalidInputError("n_max must be non-negative")
    m = np.arange(n_max + 1)
    if n_bar == 0.0:
        amps = np.zeros(n_max + 1, dtype=np.complex128)
        amps[0] = 1.0
        return CoherentAmplitudes(amps, 0.0)
    log_mag = -0.5 * n_bar + m * math.log(abs(alpha)) - 0.5 * special.gammaln(m + 1)
    amps = np.exp(log_mag) * np.exp(1j * m * np.angle(alpha))
    tail = float(stats.poisson.sf(n_max, n_bar))
    return CoherentAmplitudes(amps / np.linalg.norm(amps), tail)


def _keep_indices(keep, n_factors):
    if isinstance(keep, (int, np.integer)):
        keep = (keep,)
    idx = sorted({int(k) for k in keep})
    if not idx:
        raise InvalidInputError("keep must name at least one subsystem")
    if len(idx) == n_factors:
        raise InvalidInputError("keep must be a strict subset of the factorization")
    if idx[0] < 0 or idx[-1] >= n_factors:
        raise InvalidInputError(f"subsystem index out of range for {n_factors} factors")
    return idx


def partial_trace(rho: DensityMatrix, keep: Iterable[int] | int) -> DensityMatrix:
    """Reduced density matrix over the factors in ``keep`` (order preserved)."""
    dims = rho.dims
    kept = _keep_indices(keep, len(dims))
    n = len(dims)
    tens = rho.matrix.reshape(dims + dims)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    for k in range(n):
        if k not in kept:
            col[k] = row[k]
    out = "".join(row[k] for k in kept) + "".join(col[k] for k in kept)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, tens)
    kd = tuple(dims[k] for k in kept)
    d = math.prod(kd)
    return DensityMatrix(kd, red.reshape(d, d))


def reduced_atom(state: PureState) -> np.ndarray:
    """2x2 atomic reduced matrix of a pure state, without forming |psi><psi|."""
    psi = state.tensor.reshape(ATOM_DIM, -1)
    return psi @ psi.conj().T


def purity(rho: DensityMatrix) -> float:
    """Tr rho^2."""
    mat = rho.matrix
    return float(np.sum(np.abs(mat) ** 2))


def trace_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    if rho1.dims != rho2.dims:
        raise InvalidInputError(f"dimension mismatch {rho1.dims} vs {rho2.dims}")
    ev = np.linalg.eigvalsh(rho1.matrix - rho2.matrix)
    return float(0.5 * np.sum(np.abs(ev)))


def mixture(weights: Sequence[float], states: Sequence[PureState]) -> DensityMatrix:
    """sum_k w_k |psi_k><psi_k| for equal-dimension pure states."""
    if len(weights) != len(states) or not states:
        raise InvalidInputError("weights and states must be non-empty and equal length")
    dims = states[0].dims
    mat = np.zeros((states[0].dim, states[0].dim), dtype=np.complex128)
    for w, s in zip(weights, states):
        if s.dims != dims:
            raise InvalidInputError("all states in a mixture must share dims")
        mat += w * np.outer(s.amps, s.amps.conj())
    return DensityMatrix(dims, mat)
