"""Non-Markovian memory induced by a switch.

The characteristic point ``eta*`` is where the Lindblad coefficient turns
negative for good. Since ``Gamma = -(1/4) d ln C/dt``, the RHP integral of
``-6 Gamma`` over the negative region collapses to
``(3/2) [ln C(0) - ln C(eta*)]``; the BLP backflow towards the fixed point
``1/2`` is ``[C(0) - C(eta*)] / 2`` for a pure probe.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, optimize

from .depol import RateParams
from .dynamics import (
    DynamicsProfile,
    cyclic_profile,
    numeric_profile,
    unequal_factors,
    unequal_rate_functions,
)
from .errors import BranchError, InvalidParameterError
from .switchnet import SwitchConfig, block_partitions

log = logging.getLogger(__name__)

SCAN_STEP = 1e-3
ROOT_TOL = 1e-12
# Relative changes below this carry no sign (rounding and finite-difference noise).
GAMMA_FLOOR = 1e-8
ETA_PROXY = 1e-9


def normalize(memory: float) -> float:
    if math.isinf(memory):
        return 1.0
    return memory / (1 + memory)


def bisect(f: Callable[[float], float], lo: float, hi: float, xtol: float = ROOT_TOL) -> float:
    """Plain bisection on a sign change of ``f`` over ``[lo, hi]``."""
    f_lo = f(lo)
    if np.sign(f_lo) == np.sign(f(hi)):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class CharacteristicRoot(NamedTuple):
    eta: float | None
    pole: bool
    sign_changes: int

    @property
    def markovian(self) -> bool:
        return self.eta is None


def _signs(values: np.ndarray, floor: float) -> np.ndarray:
    s = np.sign(values)
    s[np.abs(values) <= floor] = 0
    s[np.isnan(values)] = 0
    return s


def characteristic_eta(profile: DynamicsProfile, gamma: float, step: float = SCAN_STEP,
                       xtol: float = ROOT_TOL) -> CharacteristicRoot:
    """Largest ``eta`` in (0, 1) where ``Gamma`` turns from positive to negative.

    Since ``Gamma = gamma eta C'(eta) / C``, the sign of ``Gamma`` is the sign
    of ``d|C|/d eta``. The scan runs downward from ``eta = 1`` on a grid of
    ``step`` and looks for the first place where ``|C|`` stops decreasing;
    the bracket is then bisected. A bracket across which ``C`` itself
    changes sign is a pole of ``Gamma``, and the zero of ``C`` is located
    instead.
    """
    grid = 1.0 - step * np.arange(0, int(round(1 / step)))
    mag = np.abs(np.asarray(profile.C(grid), dtype=float))
    # slope of |C| between neighbours, as eta decreases; positive means Gamma > 0
    drop = mag[:-1] - mag[1:]
    signs = _signs(drop, GAMMA_FLOOR * step * np.maximum(mag[:-1], 1e-300))
    changes = []
    last_i = None
    for i, s in enumerate(signs):
        if s == 0:
            continue
        if last_i is not None and s != signs[last_i]:
            changes.append((last_i, i))
        last_i = i
    crossings = [(a, b) for a, b in changes if signs[a] > 0 > signs[b]]
    if len(changes) > 1:
        log.warning("%s: %d sign changes of Gamma on (0, 1)", profile.label, len(changes))
    if not crossings:
        return CharacteristicRoot(None, False, len(changes))
    a, b = crossings[0]
    # the extremum of |C| lies between grid[a] and grid[b + 1]
    hi, lo = float(grid[a]), float(grid[min(b + 1, len(grid) - 1)])
    lo = max(lo, step * 1e-3)
    if np.sign(profile.C(hi)) != np.sign(profile.C(lo)):
        return CharacteristicRoot(bisect(profile.C, lo, hi, xtol), True, len(changes))

    def g(e):
        return float(profile.gamma(e, gamma))

    root = bisect(g, lo, hi, xtol)
    return CharacteristicRoot(root, False, len(changes))


@dataclass(frozen=True)
class MeasureResult:
    label: str
    gamma: float
    eta_star: float | None
    memory: float
    normalized: float
    pole_flag: bool = False
    c_infinity: float | None = None
    c_star: float | None = None
    quadrature: float | None = None
    partition: tuple[int, ...] | None = None
    post: str | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def markovian(self) -> bool:
        return self.eta_star is None

    @property
    def t_minus(self) -> float | None:
        if self.eta_star is None:
            return None
        return -math.log(self.eta_star) / (4 * self.gamma)


def rhp_memory(profile: DynamicsProfile, root: CharacteristicRoot, gamma: float,
               check: bool = True) -> MeasureResult:
    """RHP memory from the log-ratio closed form, with a quadrature cross-check.

    The cross-check integrates ``-6 Gamma`` in ``eta`` coordinates,
    ``dt = -d eta / (4 gamma eta)``, over ``(0, eta*)``.
    """
    if root.markovian:
        return MeasureResult(profile.label, gamma, None, 0.0, 0.0)
    c_inf = profile.c_infinity()
    notes = []
    if profile.c_at_zero is None:
        gap = abs(c_inf - profile.C(ETA_PROXY))
        notes.append(f"C(0) vs C({ETA_PROXY:g}) gap {gap:.2e}")
    if root.pole:
        return MeasureResult(profile.label, gamma, root.eta, math.inf, 1.0, True, c_inf,
                             profile.C(root.eta), notes=tuple(notes))
    c_star = profile.C(root.eta)
    if c_inf <= 0 or c_star <= 0:
        raise BranchError(f"{profile.label}: C(0)={c_inf:.6g}, C(eta*)={c_star:.6g}; log undefined")
    memory = 1.5 * (math.log(c_inf) - math.log(c_star))
    quad = None
    if check:
        quad, _ = integrate.quad(
            lambda e: -6 * float(profile.gamma(e, gamma)) / (4 * gamma * e),
            0.0, root.eta, epsabs=1e-12, epsrel=1e-10, limit=200,
        )
    return MeasureResult(profile.label, gamma, root.eta, memory, normalize(memory), False,
                         c_inf, c_star, quad, notes=tuple(notes))


def measure(profile: DynamicsProfile, gamma: float, check: bool = True) -> MeasureResult:
    return rhp_memory(profile, characteristic_eta(profile, gamma), gamma, check)


@dataclass(frozen=True)
class BlpResult:
    c0: float
    c_star: float
    m_blp: float
    normalized: float


def blp_memory(profile: DynamicsProfile, eta_star: float) -> BlpResult:
    """Backflow of trace distance to ``1/2`` after ``eta*``, maximised by a pure probe."""
    c0 = profile.c_infinity()
    cs = profile.C(eta_star)
    m = 0.5 * (c0 - cs)
    return BlpResult(c0, cs, m, normalize(m))


@dataclass(frozen=True)
class UnequalMemory:
    """RHP memory of an unequal-rate switch.

    ``value`` is the quadrature over positive regions up to ``t_max``;
    ``tail`` estimates what lies beyond; ``log_check`` is the same quantity
    from log-differences of the transfer factors.
    """

    value: float
    tail: float
    intervals: tuple[tuple[float, float], ...]
    log_check: float
    negative_region: bool
    t_max: float

    @property
    def total(self) -> float:
        return self.value + self.tail


def _log_potential(rates: RateParams, n: int, ts) -> np.ndarray:
    """``ln C + (1/2) ln(A - B)``; its time derivative is ``-2 (2 Gamma + Gamma3)``."""
    c, d = unequal_factors(rates, ts, n)
    return np.log(c) + 0.5 * np.log(d)


def rhp_unequal(rates: RateParams, t_max: float | None = None, n: int = 2,
                points: int = 4001, epsrel: float = 1e-6) -> UnequalMemory:
    """Integral of ``-2 (2 Gamma + Gamma3)`` where it is positive, on ``[0, t_max]``."""
    nonzero = [g for g in rates.rates if g > 0]
    if not nonzero:
        return UnequalMemory(0.0, 0.0, (), 0.0, False, 0.0)
    t_max = 20 / min(nonzero) if t_max is None else t_max
    if t_max <= 0:
        raise InvalidParameterError(f"t_max must be positive, got {t_max}")
    rate_fn = unequal_rate_functions(rates, n)

    def integrand(t):
        g, g3 = rate_fn(t)
        return -2 * (2 * g + g3)

    grid = np.linspace(0.0, t_max, points)
    values = np.asarray(integrand(grid))
    signs = _signs(values.copy(), GAMMA_FLOOR * max(rates.rates))

    def scalar(t):
        return float(integrand(t))

    # boundaries where the integrand changes sign, bracketed on the grid
    intervals, start, last_i = [], None, None
    for i, s in enumerate(signs):
        if s == 0:
            continue
        if last_i is not None and s != signs[last_i]:
            edge = optimize.brentq(scalar, grid[last_i], grid[i], xtol=1e-14)
            if s > 0:
                start = edge
            elif start is not None:
                intervals.append((start, edge))
                start = None
        elif last_i is None and s > 0:
            start = 0.0
        last_i = i
    if start is not None:
        intervals.append((start, t_max))
    if not intervals:
        return UnequalMemory(0.0, 0.0, (), 0.0, False, t_max)

    value = 0.0
    for a, b in intervals:
        part, _ = integrate.quad(scalar, a, b, epsrel=epsrel, epsabs=1e-12, limit=200)
        value += part
    ends = np.array([x for ab in intervals for x in ab])
    pot = _log_potential(rates, n, ends).reshape(-1, 2)
    log_check = float(np.sum(pot[:, 1] - pot[:, 0]))
    tail = 0.0
    if intervals[-1][1] == t_max:
        far = _log_potential(rates, n, np.array([math.inf, t_max]))
        tail = float(far[0] - far[1])
    return UnequalMemory(value, tail, tuple(intervals), log_check, True, t_max)


@dataclass(frozen=True)
class BoundCheck:
    bound: float
    normalized: float
    terms: dict
    decreasing: bool


def asymptotic_bound_check(gamma: float = 2.0, n_max: int = 15) -> BoundCheck:
    """``-(3/2) ln C_n(eta*_n)`` for cyclic ``n = 2..n_max``; the last term bounds the memory."""
    terms = {}
    for n in range(2, n_max + 1):
        prof = cyclic_profile(n)
        root = characteristic_eta(prof, gamma)
        terms[n] = -1.5 * math.log(prof.C(root.eta))
    seq = [terms[n] for n in sorted(terms)]
    decreasing = all(b < a for a, b in zip(seq, seq[1:]))
    bound = terms[n_max]
    return BoundCheck(bound, normalize(bound), terms, decreasing)


def post_label(index: int) -> str:
    return "+" if index == 0 else f"F{index}"


def configuration_profile(sizes: tuple[int, ...], post_index: int = 0) -> DynamicsProfile:
    """Closed form for all-singleton blocks post-selected on ``|+>``, brute force otherwise."""
    if post_index == 0 and set(sizes) == {1}:
        return cyclic_profile(len(sizes))
    return numeric_profile(SwitchConfig.partitioned(sizes, post_index))


def partition_measures(X: int, n: int, gamma: float, posts: str = "best",
                       check: bool = False) -> list[MeasureResult]:
    """Memory for every rotation class of block sizes and every selected outcome.

    ``posts`` is ``"plus"`` (the uniform outcome only), ``"minus"`` (the
    remaining Fourier outcomes) or ``"best"`` (all of them). Results are
    memoized; brute force at X = 5 takes seconds.
    """
    if posts not in ("best", "plus", "minus"):
        raise InvalidParameterError(f"unknown post-selection selector {posts!r}")
    return list(_partition_measures(X, n, float(gamma), posts, check))


@functools.lru_cache(maxsize=64)
def _partition_measures(X, n, gamma, posts, check) -> tuple[MeasureResult, ...]:
    indices = {"plus": [0], "minus": list(range(1, n)), "best": list(range(n))}[posts]
    out = []
    for sizes in block_partitions(X, n):
        for k in indices:
            res = measure(configuration_profile(sizes, k), gamma, check)
            out.append(replace(res, partition=sizes, post=post_label(k)))
    return tuple(out)


def best_configuration(X: int, n: int, gamma: float = 2.0, posts: str = "best",
                       check: bool = False) -> MeasureResult:
    """Maximum normalized memory over block partitions and post-selected outcomes."""
    candidates = partition_measures(X, n, gamma, posts, check)
    return max(candidates, key=lambda r: r.normalized)


def full_switch_profile(X: int = 3, post=None) -> DynamicsProfile:
    return numeric_profile(SwitchConfig.full(X, post))
