"""Laboratory parameters, the two-mode rotation, and frame conversion of states.

All quantities are in units of the mode-1 atom coupling (lambda1 = 1).  The
rotation mixes the laboratory modes a1, a2 into b1, b2::

    a1 = cos(theta) b1 + sin(theta) b2
    a2 = -sin(theta) b1 + cos(theta) b2
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidInputError, SingularParametersError, TruncationOverflowError
from .hilbert import NORM_TOL, PureState

PRINCIPAL = "principal"
DECOUPLE_MODE1 = "decouple_mode1"
A_TO_B = "a_to_b"
B_TO_A = "b_to_a"

_KERR_TOL = 1e-12


@dataclass(frozen=True)
class RawParams:
    """Laboratory-frame constants.

    omega1, omega2 : mode frequencies
    omega0 : atomic transition frequency
    chi1, chi2 : self-action Kerr constants
    chi_bar : cross-action Kerr constant
    lam : mode-mode (evanescent) coupling
    lambda1, lambda2 : atom-mode couplings
    """

    omega1: float = 0.0
    omega2: float = 0.0
    omega0: float = 0.0
    chi1: float = 0.0
    chi2: float = 0.0
    chi_bar: float = 0.0
    lam: float = 0.0
    lambda1: float = 1.0
    lambda2: float = 0.0

    def __post_init__(self):
        if not self.lambda1 > 0.0:
            raise InvalidInputError("lambda1 must be positive")
        if self.lambda2 < 0.0:
            raise InvalidInputError("lambda2 must be non-negative")

    @classmethod
    def codirectional(cls, chi=0.0, **kwargs):
        """Parameters with chi1 = chi2 = chi and chi_bar = 2 chi."""
        return cls(chi1=chi, chi2=chi, chi_bar=2.0 * chi, **kwargs)

    @property
    def is_codirectional(self):
        return (abs(self.chi1 - self.chi2) <= _KERR_TOL
                and abs(self.chi_bar - 2.0 * self.chi1) <= _KERR_TOL)

    def with_balanced_lambda(self):
        return replace(self, lam=balanced_lambda(self))


@dataclass(frozen=True)
class TransformedParams:
    """Rotated-frame constants.

    ``lam`` and ``omega0`` are carried along so the rotated Hamiltonian and the
    revival formula can be rebuilt; ``omega0`` is kept consistent with
    ``Delta = Omega2 - omega0``.
    """

    theta: float = 0.0
    Omega1: float = 0.0
    Omega2: float = 0.0
    mu1: float = 0.0
    mu2: float = 1.0
    mu_bar: float = 1.0
    Delta: float = 0.0
    chi: float = 0.0
    omega0: float = 0.0
    lam: float = 0.0

    @classmethod
    def resonant(cls, mu_bar=1.0, Delta=0.0, chi=0.0, Omega1=0.0, Omega2=0.0):
        """Decoupled-mode parameters (mu1 = 0, mu2 = mu_bar) for direct use."""
        return cls(theta=0.0, Omega1=Omega1, Omega2=Omega2, mu1=0.0, mu2=mu_bar,
                   mu_bar=mu_bar, Delta=Delta, chi=chi, omega0=Omega2 - Delta)


def balanced_lambda(raw: RawParams) -> float:
    """Mode-mode coupling that makes a single rotated mode carry all atom coupling."""
    denom = raw.lambda2 ** 2 - raw.lambda1 ** 2
    if denom == 0.0:
        raise SingularParametersError("balanced lambda undefined for lambda1 == lambda2")
    return raw.lambda1 * raw.lambda2 * (raw.omega2 - raw.omega1) / denom


def _mu1(raw, theta):
    return raw.lambda1 * math.cos(theta) - raw.lambda2 * math.sin(theta)


def _mu2(raw, theta):
    return raw.lambda2 * math.cos(theta) + raw.lambda1 * math.sin(theta)


def mixing_angle(raw: RawParams, branch: str = PRINCIPAL) -> float:
    """Rotation angle removing the a1^dag a2 + h.c. term.

    ``principal`` returns 0.5 * arctan(2 lam / (omega2 - omega1)) in (-pi/4, pi/4]
    (pi/4 when omega1 == omega2 and lam != 0).  ``decouple_mode1`` shifts that
    angle by a multiple of pi/2 so that |mu1| is smallest and mu2 >= 0; for
    degenerate modes with lam == 0 every angle diagonalizes the field part and
    the exact decoupling angle atan2(lambda1, lambda2) is returned.
    """
    dw = raw.omega2 - raw.omega1
    if raw.lam == 0.0:
        theta = 0.0
    elif dw == 0.0:
        theta = math.pi / 4.0
    else:
        theta = 0.5 * math.atan(2.0 * raw.lam / dw)
    if branch == PRINCIPAL:
        return theta
    if branch != DECOUPLE_MODE1:
        raise InvalidInputError(f"unknown branch {branch!r}")
    if raw.lam == 0.0 and dw == 0.0:
        return math.atan2(raw.lambda1, raw.lambda2)
    candidates = [theta + k * math.pi / 2.0 for k in (-1, 0, 1, 2)]
    scale = max(raw.lambda1, raw.lambda2)

    def key(th):
        # |mu1| first (rounded so near-ties fall through), then mu2 >= 0, then small |theta|
        return (round(abs(_mu1(raw, th)) / scale, 12), _mu2(raw, th) < 0.0, abs(th))

    return min(candidates, key=key)


def transform_params(raw: RawParams, theta: float, delta=None, sqrt_form=False) -> TransformedParams:
    """Rotated-frame frequencies and couplings for angle ``theta``.

    ``delta`` overrides Omega2 - omega0 (the effective omega0 is then
    Omega2 - delta).  ``sqrt_form=True`` takes the square root of the rotated
    frequency combinations instead of the linear form.
    """
    kerr_on = any(abs(x) > 0.0 for x in (raw.chi1, raw.chi2, raw.chi_bar))
    if kerr_on and not raw.is_codirectional:
        raise InvalidInputError("rotation requires the codirectional coupler chi1 = chi2 = chi_bar / 2")
    c, s = math.cos(theta), math.sin(theta)
    s2 = math.sin(2.0 * theta)
    om1 = raw.omega1 * c * c + raw.omega2 * s * s - raw.lam * s2
    om2 = raw.omega2 * c * c + raw.omega1 * s * s + raw.lam * s2
    if sqrt_form:
        if om1 < 0.0 or om2 < 0.0:
            raise InvalidInputError("square-root frequency form needs non-negative radicands")
        om1, om2 = math.sqrt(om1), math.sqrt(om2)
    if delta is None:
        omega0 = raw.omega0
        delta = om2 - omega0
    else:
        delta = float(delta)
        omega0 = om2 - delta
    return TransformedParams(
        theta=theta,
        Omega1=om1,
        Omega2=om2,
        mu1=_mu1(raw, theta),
        mu2=_mu2(raw, theta),
        mu_bar=math.hypot(raw.lambda1, raw.lambda2),
        Delta=delta,
        chi=raw.chi1,
        omega0=omega0,
        lam=raw.lam,
    )


def coherent_frame_change(alpha1, alpha2, theta):
    """Rotated coherent amplitudes (beta1, beta2) of |alpha1, alpha2> in the a-modes."""
    c, s = math.cos(theta), math.sin(theta)
    return c * alpha1 - s * alpha2, s * alpha1 + c * alpha2


def sector_rotation(n_photons: int, theta: float) -> np.ndarray:
    """Orthogonal (N+1)x(N+1) matrix taking |k, N-k>_a to the b-mode basis |p, N-p>_b.

    Columns are built by applying a1^dag = c b1^dag + s b2^dag and
    a2^dag = -s b1^dag + c b2^dag one photon at a time, which is the binomial
    expansion of (a1^dag)^k (a2^dag)^(N-k)|0,0> evaluated without the large
    alternating binomial sums.
    """
    c, s = math.cos(theta), math.sin(theta)
    out = np.empty((n_photons + 1, n_photons + 1))
    for k in range(n_photons + 1):
        # vec[p] is the amplitude on |p, n-p>_b for the current photon count n
        vec = np.ones(1)
        n = 0
        for coeffs, count in (((-s, c), n_photons - k), ((c, s), k)):
            x1, x2 = coeffs
            for j in range(count):
                new = np.zeros(n + 2)
                p = np.arange(n + 1)
                new[p + 1] += x1 * np.sqrt(p + 1.0) * vec
                new[p] += x2 * np.sqrt(n - p + 1.0) * vec
                n += 1
                # divide by sqrt of the running occupation of the mode being filled
                vec = new / math.sqrt(j + 1.0)
        out[:, k] = vec
    return out


def fock_frame_change(state: PureState, theta: float, direction: str = A_TO_B, out_dims=None) -> PureState:
    """Re-express ``state`` in the rotated (``a_to_b``) or laboratory (``b_to_a``) modes.

    The atom factor is untouched.  ``out_dims`` defaults to the input dims; a
    populated photon sector that does not fit raises TruncationOverflowError.
    """
    if direction == B_TO_A:
        theta = -theta
    elif direction != A_TO_B:
        raise InvalidInputError(f"unknown direction {direction!r}")
    _, n1, n2 = state.dims
    o1, o2 = (n1, n2) if out_dims is None else (int(out_dims[-2]), int(out_dims[-1]))
    psi = state.tensor
    out = np.zeros((2, o1, o2), dtype=np.complex128)
    lost = 0.0
    for total in range(n1 + n2 - 1):
        k = np.arange(max(0, total - n2 + 1), min(total, n1 - 1) + 1)
        sector = psi[:, k, total - k]
        if not np.any(sector):
            continue
        if total > o1 + o2 - 2:
            raise TruncationOverflowError(
                f"photon number {total} exceeds the representable range of dims {(o1, o2)}")
        rot = sector_rotation(total, theta)[:, k]
        rotated = sector @ rot.T
        p = np.arange(total + 1)
        fits = (p < o1) & (total - p < o2)
        out[:, p[fits], total - p[fits]] = rotated[:, fits]
        lost += float(np.sum(np.abs(rotated[:, ~fits]) ** 2))
    if lost > NORM_TOL:
        raise TruncationOverflowError(
            f"frame change leaks probability {lost:.3g} outside dims {(o1, o2)}")
    return PureState.from_amplitudes(out, (2, o1, o2))


def leading_order_angle(raw: RawParams) -> float:
    """Limit of the decoupling angle as lambda2 / lambda1 -> 0 (a pure mode swap)."""
    return math.atan2(raw.lambda1, 0.0)
