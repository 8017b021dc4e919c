"""Observables, entanglement measures, detectors and closed-form checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, signal

from .errors import InvalidInputError, SingularParametersError
from .hilbert import ATOM_DIM, PSD_TOL, DensityMatrix, PureState, partial_trace, purity
from .model import TransformedParams
from .propagator import block_u, rabi_frequency

SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])
_YY = np.kron(SIGMA_Y, SIGMA_Y)
X_TOL = 1e-10
_RANK_TOL = 8.0 * np.finfo(float).eps
_BOUND_SNAP = 1e-14


@dataclass(frozen=True, eq=False)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if times.ndim != 1 or times.shape != values.shape:
            raise InvalidInputError("times and values must be 1-D arrays of equal length")
        if times.size > 1 and np.any(np.diff(times) <= 0.0):
            raise InvalidInputError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def window(self, t_min=-np.inf, t_max=np.inf):
        mask = (self.times >= t_min) & (self.times <= t_max)
        return TimeSeries(self.times[mask], self.values[mask], self.label)

    def mean(self, t_min=-np.inf, t_max=np.inf):
        """Trapezoidal time average over [t_min, t_max]."""
        w = self.window(t_min, t_max)
        if w.times.size < 2:
            raise InvalidInputError("need at least two samples to time-average")
        return float(integrate.trapezoid(w.values, w.times) / (w.times[-1] - w.times[0]))


@dataclass(frozen=True, eq=False)
class RevivalReport:
    formula_time: Optional[float]
    detected_times: np.ndarray
    envelope: TimeSeries
    collapse_time: Optional[float] = None
    collapsed_fraction: float = 0.0


def atomic_inversion(rho) -> float:
    """<sigma_z> for a DensityMatrix whose first factor is the atom, or a PureState."""
    if isinstance(rho, PureState):
        psi = rho.tensor.reshape(ATOM_DIM, -1)
        return float(np.sum(np.abs(psi[0]) ** 2) - np.sum(np.abs(psi[1]) ** 2))
    if rho.dims[0] != ATOM_DIM:
        raise InvalidInputError("first factor must be the two-level atom")
    diag = np.real(np.diag(rho.matrix)).reshape(ATOM_DIM, -1)
    return float(diag[0].sum() - diag[1].sum())


def linear_entropy(rho_atom) -> float:
    """Tr[rho (1 - rho)] = 1 - Tr rho^2 of a reduced matrix (array or DensityMatrix)."""
    mat = rho_atom.matrix if isinstance(rho_atom, DensityMatrix) else np.asarray(rho_atom)
    return float(1.0 - np.sum(np.abs(mat) ** 2))


def linear_entropy_atom(rho_full) -> float:
    """Idempotency defect of the atom after tracing out both modes.

    Bounded by 1/2 for the two-level atom.
    """
    if isinstance(rho_full, PureState):
        psi = rho_full.tensor.reshape(ATOM_DIM, -1)
        return linear_entropy(psi @ psi.conj().T)
    return 1.0 - purity(partial_trace(rho_full, [0]))


def linear_entropy_from_atom_series(pe, coh):
    """Linear entropy from excited population and coherence rho_eg."""
    pe = np.asarray(pe)
    pg = 1.0 - pe
    return 1.0 - (pe ** 2 + pg ** 2 + 2.0 * np.abs(coh) ** 2)


def _as_4x4(rho):
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    if mat.shape != (4, 4):
        raise InvalidInputError("concurrence needs a 4x4 two-qubit density matrix")
    return mat


def _snap_unit(c):
    """Clamp to [0, 1]; values within rounding distance of a bound land on it."""
    if c <= _BOUND_SNAP:
        return 0.0
    if c >= 1.0 - _BOUND_SNAP:
        return 1.0
    return float(c)


def _psd_factor(mat):
    """A with rho = A A^dag, dropping eigenvalues at rounding level."""
    vals, vecs = np.linalg.eigh(mat)
    if vals[0] < -PSD_TOL:
        raise InvalidInputError(f"density matrix not positive semidefinite (eigenvalue {vals[0]:.3g})")
    keep = vals > _RANK_TOL * max(1.0, vals[-1])
    return vecs[:, keep] * np.sqrt(vals[keep])


def concurrence_general(rho) -> float:
    """Wootters concurrence max{0, l1 - l2 - l3 - l4}.

    The l_i (eigenvalues of sqrt(sqrt(rho) rho~ sqrt(rho))) are computed as the
    singular values of A^T (sigma_y x sigma_y) A for rho = A A^dag, which keeps
    rank-deficient inputs accurate to rounding.
    """
    mat = _as_4x4(rho)
    mat = 0.5 * (mat + mat.conj().T)
    a = _psd_factor(mat)
    lam = np.zeros(4)
    if a.shape[1]:
        sv = np.linalg.svd(a.T @ _YY @ a, compute_uv=False)
        lam[:sv.size] = sv
    return _snap_unit(lam[0] - lam[1] - lam[2] - lam[3])


_X_MASK = np.array([[1, 0, 0, 1],
                    [0, 1, 1, 0],
                    [0, 1, 1, 0],
                    [1, 0, 0, 1]], dtype=bool)


def is_x_state(rho, tol=X_TOL) -> bool:
    mat = _as_4x4(rho)
    return bool(np.max(np.abs(mat[~_X_MASK])) <= tol)


def concurrence_x(rho) -> float:
    """2 max{0, |rho23| - sqrt(rho11 rho44), |rho14| - sqrt(rho22 rho33)}."""
    mat = _as_4x4(rho)
    if not is_x_state(mat):
        raise InvalidInputError("matrix is not X-structured")
    d = np.clip(np.real(np.diag(mat)), 0.0, None)
    a = abs(mat[1, 2]) - math.sqrt(d[0] * d[3])
    b = abs(mat[0, 3]) - math.sqrt(d[1] * d[2])
    return float(2.0 * max(0.0, a, b))


def x_block_indices(dims, m1, m2):
    """Flat indices of (|m1,m2;e>, |m1,m2;g>, |m1,m2-1;e>, |m1,m2+1;g>)."""
    _, n1, n2 = dims
    if not (0 <= m1 < n1 and 1 <= m2 < n2 - 1):
        raise InvalidInputError(f"X block around ({m1}, {m2}) does not fit dims {dims}")
    flat = lambda a, i, j: (a * n1 + i) * n2 + j  # noqa: E731
    return np.array([flat(0, m1, m2), flat(1, m1, m2), flat(0, m1, m2 - 1), flat(1, m1, m2 + 1)])


def x_block(amps, dims, m1=0, m2=1) -> np.ndarray:
    """4x4 projection of |psi><psi| (or a stack of states, summed with weights
    already folded in) onto the X-block basis around (m1, m2)."""
    idx = x_block_indices(dims, m1, m2)
    amps = np.atleast_2d(amps)
    sub = amps[:, idx]
    return np.einsum("ki,kj->ij", sub, sub.conj())


def sudden_death_formula(p: TransformedParams, lambda2_prime: float) -> Optional[float]:
    """Closed-form entanglement sudden-death time lambda1 t_d, or None when undefined."""
    kerr = 2.0 * p.chi - p.Delta
    if kerr == 0.0:
        return None
    shift = (p.Delta - 2.0 * p.chi) ** 2
    denom = shift - 8.0 * (1.0 + lambda2_prime ** 2)
    arg = 2.0 * shift / denom
    if not -1.0 <= arg <= 1.0:
        return None
    return math.acos(arg) / kerr


def detect_sudden_death(series: TimeSeries, eps: float = 1e-4, dwell: float = 5.0) -> Optional[float]:
    """Earliest sample time t with C < eps on every sample of [t, t + dwell].

    The window must lie inside the series.  Returns None if no such t exists.
    """
    if eps <= 0.0 or dwell < 0.0:
        raise InvalidInputError("eps must be positive and dwell non-negative")
    times = series.times
    n = times.size
    if n == 0:
        return None
    below = series.values < eps
    # first index >= i where the series is not below eps
    idx = np.where(below, n, np.arange(n))
    run_end = np.minimum.accumulate(idx[::-1])[::-1]
    window_end = np.searchsorted(times, times + dwell, side="right")
    ok = below & (run_end >= window_end) & (times + dwell <= times[-1])
    hits = np.flatnonzero(ok)
    return float(times[hits[0]]) if hits.size else None


def revival_time_formula(p: TransformedParams, n_bar: float, n: int = 1) -> float:
    """|lambda1 t_R| from the neighbouring-Rabi-frequency estimate."""
    if n < 1:
        raise InvalidInputError("revival order n must be a positive integer")
    chi, delta, mu = p.chi, p.Delta, p.mu_bar
    denom = p.lam * delta * chi + chi ** 2 * (4.0 * n_bar - 3.0) - mu ** 2
    if denom == 0.0:
        raise SingularParametersError("revival formula denominator vanishes")
    bracket = (0.5 * math.sqrt((2.0 * chi * (2.0 * n_bar - 1.0) + delta) ** 2 + mu ** 2 * (n_bar + 1.0))
               + 0.5 * math.sqrt((2.0 * chi * (2.0 * n_bar - 2.0) + delta) ** 2 + mu ** 2 * n_bar))
    return abs(2.0 * n * math.pi / denom * bracket)


def envelope(series: TimeSeries, window: float) -> TimeSeries:
    """Half peak-to-peak amplitude in a centered moving window."""
    times, vals = series.times, series.values
    lo = np.searchsorted(times, times - 0.5 * window, side="left")
    hi = np.searchsorted(times, times + 0.5 * window, side="right")
    amp = np.array([0.5 * (vals[a:b].max() - vals[a:b].min()) for a, b in zip(lo, hi)])
    return TimeSeries(times, amp, "envelope")


def default_revival_window(p: TransformedParams, n_bar: float, n_bar1: float = 0.0) -> float:
    """2 pi / Rabi frequency at the mean photon numbers."""
    return 2.0 * math.pi / float(rabi_frequency(round(n_bar1), round(n_bar), p))


def detect_revivals(series: TimeSeries, window: float, formula_time: Optional[float] = None,
                    collapse_level: float = 0.25, revival_level: float = 0.1) -> RevivalReport:
    """Locate collapse and revivals of an inversion trajectory.

    The envelope is the moving-window amplitude.  The first collapse is where
    the envelope drops below ``collapse_level`` times its initial value;
    revivals are envelope peaks after that whose prominence exceeds
    ``revival_level`` times the initial amplitude.
    """
    times = series.times
    if times.size < 3 or window <= 0.0:
        raise InvalidInputError("series too short or window not positive")
    dt = float(np.max(np.diff(times)))
    if dt > window / 16.0:
        raise InvalidInputError(f"grid spacing {dt:.3g} under-resolves the window {window:.3g}")
    if times[-1] - times[0] < 10.0 * window:
        raise InvalidInputError("series must span at least ten oscillation windows")
    env = envelope(series, window)
    start = env.values[0] if env.values[0] > 0 else env.values.max()
    if start <= 0.0:
        return RevivalReport(formula_time, np.array([]), env)
    usable = times <= times[-1] - 0.5 * window
    collapsed = (env.values < collapse_level * start) & usable
    if not np.any(collapsed):
        return RevivalReport(formula_time, np.array([]), env, None, 0.0)
    i0 = int(np.argmax(collapsed))
    tail = env.values[i0:]
    min_sep = max(1, int(round(window / dt)))
    peaks, _ = signal.find_peaks(tail, prominence=revival_level * start, distance=min_sep)
    peaks = peaks + i0
    peaks = peaks[usable[peaks]]
    frac = float(np.mean(collapsed[usable]))
    return RevivalReport(formula_time, times[peaks], env, float(times[i0]), frac)


def cnot_kerr(p: TransformedParams) -> float:
    """Kerr constant chi = (lambda1 / 2) sqrt(4 - mu_bar^2) for the gate condition."""
    if p.mu_bar > 2.0:
        raise InvalidInputError("gate condition requires mu_bar <= 2")
    return 0.5 * math.sqrt(4.0 - p.mu_bar ** 2)


@dataclass(frozen=True)
class GateReport:
    n: int
    time: float
    return_probability: dict = field(default_factory=dict)
    phase: dict = field(default_factory=dict)
    fidelity: float = 1.0


def gate_check(p: TransformedParams, n: int = 1, tol: float = 1e-9) -> GateReport:
    """Return probabilities of |e,0,0> and |g,0,1> at lambda1 t = 2 n pi.

    Amplitudes are interaction-picture block elements; ``fidelity`` is the mean
    return probability.
    """
    if n < 0 or int(n) != n:
        raise InvalidInputError("n must be a non-negative integer")
    if abs(p.Delta) > tol:
        raise InvalidInputError("gate condition requires Delta = 0")
    if abs(p.chi - cnot_kerr(p)) > tol:
        raise InvalidInputError("chi does not satisfy the gate condition")
    t = 2.0 * math.pi * n
    u = block_u(0, 0, t, p).u
    amps = {"e,0,0": u[0, 0], "g,0,1": u[1, 1]}
    prob = {k: float(abs(v) ** 2) for k, v in amps.items()}
    phase = {k: float(np.angle(v)) for k, v in amps.items()}
    return GateReport(int(n), t, prob, phase, float(np.mean(list(prob.values()))))
