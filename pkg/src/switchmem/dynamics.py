"""Effective dynamics of post-selected switches.

Two routes to the Lindblad coefficient are provided and cross-checked:

* closed forms for cyclic switches of ``n`` equal-rate channels, where the
  map contracts the Bloch vector isotropically by ``C(eta)`` and
  ``Gamma = -(1/4) d/dt ln C = gamma * eta * C'(eta) / C(eta)``;
* numeric extraction from the brute-force map, either by differentiating
  ``ln C`` or through the transfer matrix ``G`` in the normalized Pauli
  basis with ``L = dG/dt G^-1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .depol import RateParams, eta_of_t, kraus_at_times, t_of_eta
from .errors import BranchError, DegeneratePostSelectionError, InvalidParameterError, SingularMapError
from .qmat import DEFAULT_TOL, IDENTITY, PAULIS
from .switchnet import (
    DEGENERATE_PROBABILITY,
    EffectiveMap,
    SwitchConfig,
    cyclic_orderings,
    operator_tensor,
    plus_vector,
    transfer_factors_of,
)

POLE_THRESHOLD = 1e-6
FD_STEP = 1e-5  # divided by the rate scale
MAX_CONDITION = 1e12

# Orthonormal Hermitian basis F0 = 1/sqrt2, Fi = sigma_i/sqrt2.
PAULI_BASIS = np.stack([IDENTITY] + list(PAULIS)) / math.sqrt(2)


def _geometric_sums(n: int, eta):
    eta = np.asarray(eta, dtype=float)
    k = np.arange(1, n)
    powers = eta[..., None] ** k
    return powers.sum(-1), (k * powers).sum(-1), eta**n


def closed_form_C(n: int, eta):
    """Coherence factor of the cyclic ``n``-switch post-selected on ``|+>``.

    Accepts scalars or arrays of ``eta`` in ``[0, 1]``.
    """
    if n < 2:
        raise InvalidParameterError(f"need n >= 2, got {n}")
    s, _, en = _geometric_sums(n, eta)
    num = (5 * n - 1) * en - 2 * s + (n - 1)
    den = 3 * (n - 1) * en - 6 * s - (n + 3)
    out = -num / den
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ClosedFormCoeffs:
    """Numerator/denominator pieces with ``C = b2 / a2`` and ``a1 = -gamma eta a2'``."""

    a1: float
    a2: float
    b1: float
    b2: float

    @property
    def gamma(self) -> float:
        return (self.a1 * self.b2 - self.b1 * self.a2) / (self.a2 * self.b2)


def closed_form_coeffs(n: int, eta, gamma: float) -> ClosedFormCoeffs:
    s, ks, en = _geometric_sums(n, eta)
    a1 = -24 * gamma * ks + 12 * n * (n - 1) * gamma * en
    a2 = 4 * ((n + 3) + 6 * s - 3 * (n - 1) * en)
    b1 = 8 * gamma * ks - 4 * n * (5 * n - 1) * gamma * en
    b2 = 4 * ((n - 1) - 2 * s + (5 * n - 1) * en)
    return ClosedFormCoeffs(a1, a2, b1, b2)


def closed_form_gamma(n: int, eta, gamma: float):
    if n < 2:
        raise InvalidParameterError(f"need n >= 2, got {n}")
    out = closed_form_coeffs(n, eta, gamma).gamma
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class DynamicsProfile:
    """A one-parameter family of isotropic switched maps, indexed by ``eta``.

    ``c`` must accept arrays. ``gamma_fn(eta, gamma)`` is an exact Lindblad
    coefficient when one is known; otherwise it is obtained from ``c`` by
    finite differences.
    """

    kind: str
    c: Callable
    label: str = ""
    gamma_fn: Callable | None = None
    c_at_zero: float | None = None
    config: SwitchConfig | None = field(default=None, repr=False)

    def C(self, eta):
        out = self.c(np.asarray(eta, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def gamma(self, eta, gamma: float):
        if self.gamma_fn is not None:
            return self.gamma_fn(eta, gamma)
        return gamma_from_C(self, eta, gamma)

    def c_infinity(self) -> float:
        """``C`` in the long-time limit ``eta -> 0``."""
        if self.c_at_zero is not None:
            return self.c_at_zero
        return self.C(0.0)


def cyclic_profile(n: int) -> DynamicsProfile:
    return DynamicsProfile(
        "cyclic",
        lambda eta: closed_form_C(n, eta),
        f"cyclic-{n}",
        gamma_fn=lambda eta, g: closed_form_gamma(n, eta, g),
        c_at_zero=(n - 1) / (n + 3),
    )


def numeric_profile(config: SwitchConfig, kind: str | None = None) -> DynamicsProfile:
    """Profile whose ``C`` comes from brute-force enumeration of ``config``."""
    if kind is None:
        kind = {"cyclic": "cyclic-numeric", "partitioned": "partitioned", "full": "full-switch"}.get(
            config.orderings.kind, "numeric"
        )
    return DynamicsProfile(kind, lambda eta: config.factors(eta).offdiag, config.label, config=config)


def full_switch_candidate_C(eta):
    """Coherence factor ``(2 - 3 eta)/3`` expected for the 3-channel full switch."""
    return (2 - 3 * np.asarray(eta, dtype=float)) / 3


def _stencil(t: np.ndarray, h: float):
    """Offsets (in units of h) and weights for a Richardson-extrapolated derivative.

    Central differences where ``t >= h``; a second-order forward stencil
    otherwise so ``t`` never goes negative.
    """
    central = t >= h
    offsets = np.where(
        central[..., None],
        np.array([-1.0, 1.0, -0.5, 0.5]),
        np.array([0.0, 1.0, 2.0, 0.5]),
    )
    return central, offsets


def _combine(values: np.ndarray, central: np.ndarray, h: float) -> np.ndarray:
    # values[..., j] are f(t + offsets[j] * h)
    d_h = (values[..., 1] - values[..., 0]) / (2 * h)
    d_h2 = (values[..., 3] - values[..., 2]) / h
    rich_c = (4 * d_h2 - d_h) / 3
    # forward: D(h) = (-3 f0 + 4 f(h) - f(2h)) / 2h, D(h/2) = (-3 f0 + 4 f(h/2) - f(h)) / h
    f0, f1, f2, fh = (values[..., i] for i in range(4))
    fd_h = (-3 * f0 + 4 * f1 - f2) / (2 * h)
    fd_h2 = (-3 * f0 + 4 * fh - f1) / h
    rich_f = (4 * fd_h2 - fd_h) / 3
    return np.where(central, rich_c, rich_f)


def time_derivative(f: Callable, t, h: float):
    """Richardson-extrapolated ``df/dt`` for a vectorised scalar function ``f``."""
    t = np.asarray(t, dtype=float)
    central, offsets = _stencil(t, h)
    values = f(t[..., None] + offsets * h)
    return _combine(values, central, h)


def gamma_from_C(profile: DynamicsProfile, eta, gamma: float, h: float | None = None,
                 pole_threshold: float = POLE_THRESHOLD):
    """``-(1/4) d/dt ln C`` evaluated through ``eta = exp(-4 gamma t)``.

    Where ``|C| < pole_threshold`` the result is a signed infinity.
    """
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be > 0, got {gamma!r}")
    h = FD_STEP / gamma if h is None else h
    eta_arr = np.asarray(eta, dtype=float)
    t = np.vectorize(lambda e: t_of_eta(gamma, e), otypes=[float])(eta_arr)

    def log_abs_c(ts):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(profile.C(np.exp(-4 * gamma * ts))))

    def c_of_t(ts):
        return profile.C(np.exp(-4 * gamma * ts))

    with np.errstate(invalid="ignore"):
        out = -0.25 * time_derivative(log_abs_c, t, h)
    c_here = np.asarray(profile.C(eta_arr))
    poles = np.abs(c_here) < pole_threshold
    if np.any(poles):
        dc = time_derivative(c_of_t, t, h)
        # Gamma = -(1/4) C'_t / C
        signs = np.sign(-dc * np.where(c_here == 0, 1.0, c_here))
        out = np.where(poles, np.where(signs == 0, 1.0, signs) * np.inf, out)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Map matrix in the normalized Pauli basis, ``r(t) = G r(0)``.

    ``linearity_residual`` is ``||sum M^dag M - p 1||``; the normalized map
    extends linearly to traceless inputs only when it vanishes.
    """

    G: np.ndarray
    eta: float | None = None
    probability: float = 1.0
    linearity_residual: float = 0.0

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.G).copy()


def transfer_of_map(emap: EffectiveMap, tol: float = DEFAULT_TOL.iterated) -> TransferMatrix:
    p = emap.trace_factor()
    if p < DEGENERATE_PROBABILITY:
        raise DegeneratePostSelectionError(f"post-selection probability {p:.3e} is degenerate")
    residual = float(np.linalg.norm(emap.gram() - p * IDENTITY, ord=2)) / p
    images = np.stack([emap.unnormalized(F) for F in PAULI_BASIS]) / p
    # G[j, i] = Tr[F_j Phi(F_i)]
    G = np.einsum("jab,iba->ji", PAULI_BASIS, images).real
    return TransferMatrix(G, emap.eta, p, residual)


def transfer_matrix(builder: Callable[[float], EffectiveMap], eta: float) -> TransferMatrix:
    """Transfer matrix of the post-selected map built at ``eta``."""
    return transfer_of_map(builder(eta))


@dataclass(frozen=True)
class GeneratorDiagonal:
    gamma1: float
    gamma2: float
    gamma3: float
    condition: float = 1.0

    @property
    def total(self) -> float:
        return self.gamma1 + self.gamma2 + self.gamma3

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.gamma1, self.gamma2, self.gamma3)


def generator_from_transfer(G, dG) -> GeneratorDiagonal:
    """Pauli rates from ``L = dG G^-1``.

    For a Pauli-diagonal generator the Bloch component ``i`` decays at
    ``-L_ii = 2 (sum_j Gamma_j - Gamma_i)``, which is inverted here.
    """
    G = np.asarray(getattr(G, "G", G), dtype=float)
    dG = np.asarray(dG, dtype=float)
    cond = float(np.linalg.cond(G))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMapError(f"transfer matrix is singular (condition number {cond:.3e})")
    L = dG @ np.linalg.inv(G)
    s = -0.5 * np.diag(L)[1:]
    total = 0.5 * s.sum()
    g = total - s
    return GeneratorDiagonal(float(g[0]), float(g[1]), float(g[2]), cond)


def transfer_derivative(family: Callable[[float], np.ndarray], t: float, h: float) -> np.ndarray:
    """``dG/dt`` of a matrix-valued family by the same stencil as :func:`time_derivative`."""
    t_arr = np.asarray(t, dtype=float)
    central, offsets = _stencil(t_arr, h)
    mats = np.stack([family(float(t + o * h)) for o in offsets])
    return _combine(np.moveaxis(mats, 0, -1), central, h)


def config_generator(config: SwitchConfig, eta: float, gamma: float, h: float | None = None) -> GeneratorDiagonal:
    """Lindblad rates of an equal-rate switch via ``L = dG G^-1``."""
    h = FD_STEP / gamma if h is None else h

    def family(t):
        return transfer_matrix(config.effective_map, eta_of_t(gamma, t)).G

    t = t_of_eta(gamma, eta)
    return generator_from_transfer(family(t), transfer_derivative(family, t, h))


def _unequal_ops(rates: RateParams, ts, n: int) -> np.ndarray:
    k = kraus_at_times(rates, ts)
    return operator_tensor(cyclic_orderings(n), [k] * n, plus_vector(n).conj() * plus_vector(n))


def unequal_factors(rates: RateParams, ts, n: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Coherence factor C and population factor A - B of the cyclic switch at times ``ts``."""
    f = transfer_factors_of(_unequal_ops(rates, ts, n))
    return f.offdiag, f.diag


def _rate_scale(rates: RateParams) -> float:
    scale = max(rates.rates)
    return scale if scale > 0 else 1.0


def unequal_rate_functions(rates: RateParams, n: int = 2, h: float | None = None):
    """Vectorised ``(Gamma(t), Gamma3(t))`` for a cyclic switch of unequal-rate channels.

    ``Gamma1 = Gamma2 = -(1/4) d ln(A - B)/dt`` and
    ``Gamma3 = (1/4) d ln(A - B)/dt - (1/2) d ln C/dt``.
    """
    h = FD_STEP / _rate_scale(rates) if h is None else h

    def rates_at(t):
        t = np.asarray(t, dtype=float)
        central, offsets = _stencil(t, h)
        c, d = unequal_factors(rates, t[..., None] + offsets * h, n)
        if np.any(c <= 0) or np.any(d <= 0):
            raise BranchError("transfer factor is nonpositive; its logarithm is undefined")
        dlog_c = _combine(np.log(c), central, h)
        dlog_d = _combine(np.log(d), central, h)
        return -0.25 * dlog_d, 0.25 * dlog_d - 0.5 * dlog_c

    return rates_at


def unequal_generators(rates: RateParams, t: float | None = None, n: int = 2) -> GeneratorDiagonal:
    """Lindblad rates of the cyclic ``n``-switch over unequal-rate channels at time ``t``."""
    t = rates.t if t is None else t
    g, g3 = unequal_rate_functions(rates, n)(t)
    return GeneratorDiagonal(float(g), float(g), float(g3))


def unequal_transfer_generator(rates: RateParams, t: float, n: int = 2) -> GeneratorDiagonal:
    """Same rates as :func:`unequal_generators`, through ``L = dG G^-1``."""
    h = FD_STEP / _rate_scale(rates)

    def family(s):
        ops = _unequal_ops(rates, s, n)
        return transfer_of_map(EffectiveMap(ops, plus_vector(n))).G

    return generator_from_transfer(family(t), transfer_derivative(family, t, h))
