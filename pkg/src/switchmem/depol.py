"""Qubit depolarizing channel family with constant Pauli rates.

The channel solves ``d rho/dt = sum_i gamma_i (sigma_i rho sigma_i - rho)``
in the parametrisation where populations relax with ``exp(-2 zeta_1)`` and
coherences with ``exp(-2 zeta_2)``, ``zeta_1 = (gamma_1 + gamma_2) t`` and
``zeta_2 = (gamma_2 + gamma_3) t``.

At equal rates everything depends on ``eta = exp(-4 gamma t)`` only, which is
the evolution variable used downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .qmat import DEFAULT_TOL, KrausSet


@dataclass(frozen=True)
class RateParams:
    gamma1: float
    gamma2: float
    gamma3: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidParameterError(f"{name} must be finite and >= 0, got {v!r}")
        if math.isnan(self.t) or self.t < 0:
            raise InvalidParameterError(f"t must be >= 0, got {self.t!r}")

    @classmethod
    def equal(cls, gamma: float, t: float = 0.0) -> "RateParams":
        return cls(gamma, gamma, gamma, t)

    def at(self, t: float) -> "RateParams":
        return RateParams(self.gamma1, self.gamma2, self.gamma3, t)

    @property
    def rates(self) -> tuple[float, float, float]:
        return (self.gamma1, self.gamma2, self.gamma3)


@dataclass(frozen=True)
class DepolCoeffs:
    zeta1: float
    zeta2: float
    a1: float
    a2: float
    a3: float
    # A3 is real and positive for every admissible input, so theta stays 0.
    theta: float = 0.0


def _accumulated(rate_sum: float, t: float) -> float:
    # 0 * inf is nan; a zero rate never decays.
    return 0.0 if rate_sum == 0 else rate_sum * t


def depol_coeffs(rates: RateParams, tol: float = DEFAULT_TOL.algebraic) -> DepolCoeffs:
    """Accumulated decays and Kraus weights at time ``rates.t``.

    Raises :class:`InvalidParameterError` when ``A1 < A3`` beyond ``tol``,
    which would make the weight of the fourth Kraus operator imaginary.
    """
    z1 = _accumulated(rates.gamma1 + rates.gamma2, rates.t)
    z2 = _accumulated(rates.gamma2 + rates.gamma3, rates.t)
    e1 = math.exp(-2 * z1)
    a1 = 0.5 * (1 + e1)
    a2 = 0.5 * (1 - e1)
    a3 = math.exp(-2 * z2)
    if a1 - a3 < -tol:
        raise InvalidParameterError(
            f"A1 - A3 = {a1 - a3:.3e} < 0 for rates {rates.rates} at t={rates.t}; "
            "coherences would outlive populations"
        )
    return DepolCoeffs(z1, z2, a1, a2, a3)


def coeffs_from_eta(eta: float) -> DepolCoeffs:
    """Equal-rate coefficients written directly in ``eta``."""
    if not (0.0 <= eta <= 1.0):
        raise InvalidParameterError(f"eta must lie in [0, 1], got {eta!r}")
    z = math.inf if eta == 0 else -0.5 * math.log(eta)
    return DepolCoeffs(z, z, 0.5 * (1 + eta), 0.5 * (1 - eta), eta)


def depol_kraus(coeffs: DepolCoeffs) -> KrausSet:
    """The four Kraus operators ``K1..K4`` for the given coefficients."""
    return KrausSet(kraus_array(coeffs.a1, coeffs.a2, coeffs.a3, coeffs.theta))


def kraus_array(a1, a2, a3, theta=0.0) -> np.ndarray:
    """Kraus operators as an array of shape ``(..., 4, 2, 2)``.

    Coefficients may be scalars or equally shaped arrays (one channel per
    entry), which is how batched sweeps over ``eta`` are evaluated.
    """
    a1, a2, a3 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a1, a2, a3)))
    phase = np.exp(1j * theta)
    out = np.zeros(a1.shape + (4, 2, 2), dtype=complex)
    s2 = np.sqrt(a2)
    out[..., 0, 0, 1] = s2
    out[..., 1, 1, 0] = s2
    plus = np.sqrt(0.5 * (a1 + a3))
    minus = np.sqrt(np.clip(0.5 * (a1 - a3), 0.0, None))
    out[..., 2, 0, 0] = plus * phase
    out[..., 2, 1, 1] = plus
    out[..., 3, 0, 0] = -minus * phase
    out[..., 3, 1, 1] = minus
    return out


def equal_rate_kraus(eta) -> np.ndarray:
    """Kraus array for the equal-rate channel at one or many ``eta`` values."""
    eta = np.asarray(eta, dtype=float)
    if np.any((eta < 0) | (eta > 1)):
        raise InvalidParameterError("eta must lie in [0, 1]")
    return kraus_array(0.5 * (1 + eta), 0.5 * (1 - eta), eta)


def rates_kraus(rates: RateParams) -> KrausSet:
    return depol_kraus(depol_coeffs(rates))


def kraus_at_times(rates: RateParams, ts, tol: float = DEFAULT_TOL.algebraic) -> np.ndarray:
    """Kraus arrays ``(..., 4, 2, 2)`` for the rates of ``rates`` at many times.

    Same coefficients as :func:`depol_coeffs`; ``rates.t`` is ignored.
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0):
        raise InvalidParameterError("times must be >= 0")
    s1 = rates.gamma1 + rates.gamma2
    s2 = rates.gamma2 + rates.gamma3
    with np.errstate(invalid="ignore"):
        e1 = np.where(s1 == 0, 1.0, np.exp(-2 * s1 * ts))
        a3 = np.where(s2 == 0, 1.0, np.exp(-2 * s2 * ts))
    a1 = 0.5 * (1 + e1)
    if np.any(a1 - a3 < -tol):
        raise InvalidParameterError(
            f"A1 - A3 < 0 for rates {rates.rates}; coherences would outlive populations"
        )
    return kraus_array(a1, 0.5 * (1 - e1), a3)


def eta_of_t(gamma: float, t: float) -> float:
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be > 0, got {gamma!r}")
    if t < 0:
        raise InvalidParameterError(f"t must be >= 0, got {t!r}")
    return math.exp(-4 * gamma * t)


def t_of_eta(gamma: float, eta: float) -> float:
    """Inverse of :func:`eta_of_t`; ``eta == 0`` maps to ``math.inf``."""
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be > 0, got {gamma!r}")
    if not (0.0 <= eta <= 1.0):
        raise InvalidParameterError(f"eta must lie in [0, 1], got {eta!r}")
    if eta == 0:
        return math.inf
    return max(0.0, -math.log(eta) / (4 * gamma))
