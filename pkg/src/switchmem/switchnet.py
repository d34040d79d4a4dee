"""Superchannels that place channel orderings under coherent control.

A configuration is a set of orderings over *blocks* of channel slots plus a
control preparation and a post-selected outcome. Slots ``0..X-1`` are split
into contiguous blocks; inside a block the slots act as a fixed composite,
lowest slot first. An ordering lists block indices in application order.

For a Kraus index tuple ``T`` (one index per slot) the post-selected target
evolves under

    M_T = sum_m <post|m><m|prep> P_m(T),

where ``P_m(T)`` is the product of block composites applied in ordering
``m``. Enumeration over all tuples is vectorised with broadcasting: slot
``s`` owns tensor axis ``s`` and products broadcast across the others.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .depol import equal_rate_kraus
from .errors import DegeneratePostSelectionError, InvalidParameterError, SizeLimitError
from .qmat import DEFAULT_TOL, KET0, KET_PLUS, DensityMatrix, KrausSet, apply_kraus, dagger

Ordering = tuple[int, ...]

MAX_CHANNELS = 8
MAX_FULL_ORDER = 6
DEGENERATE_PROBABILITY = 1e-12
# Upper bound on batch * tuples held in memory at once.
_CHUNK_ELEMENTS = 1 << 18

# Layer order used for the three-channel full switch: the three cyclic
# rotations followed by the three reversed-cycle orders.
_FULL_ORDER_3 = ((0, 1, 2), (1, 2, 0), (2, 0, 1), (0, 2, 1), (1, 0, 2), (2, 1, 0))

MINUS_VECTOR_6 = np.array([1, 1, 1, -1, -1, -1], dtype=complex) / math.sqrt(6)


def contiguous_blocks(sizes: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    out, start = [], 0
    for size in sizes:
        if size < 1:
            raise InvalidParameterError(f"block sizes must be positive, got {tuple(sizes)}")
        out.append(tuple(range(start, start + size)))
        start += size
    return tuple(out)


@dataclass(frozen=True)
class OrderingSet:
    orderings: tuple[Ordering, ...]
    blocks: tuple[tuple[int, ...], ...]
    kind: str = "custom"

    def __post_init__(self):
        orderings = tuple(tuple(int(i) for i in o) for o in self.orderings)
        blocks = tuple(tuple(int(s) for s in b) for b in self.blocks)
        object.__setattr__(self, "orderings", orderings)
        object.__setattr__(self, "blocks", blocks)
        n = len(blocks)
        if not orderings:
            raise InvalidParameterError("at least one ordering is required")
        for o in orderings:
            if sorted(o) != list(range(n)):
                raise InvalidParameterError(f"ordering {o} is not a permutation of range({n})")
        flat = [s for b in blocks for s in b]
        if flat != list(range(len(flat))):
            raise InvalidParameterError(f"blocks {blocks} do not partition the slots contiguously")

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def n_channels(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def dim(self) -> int:
        return len(self.orderings)

    @property
    def block_sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)


def _rotations(n: int) -> tuple[Ordering, ...]:
    return tuple(tuple((m + j) % n for j in range(n)) for m in range(n))


def cyclic_orderings(n: int, block_sizes: Sequence[int] | None = None) -> OrderingSet:
    """The ``n`` cyclic rotations of ``(0, 1, ..., n-1)``.

    Control state ``|m>`` applies block ``m`` first, then ``m+1``, and so on
    modulo ``n``. With ``block_sizes`` the rotations act on blocks of
    several channels each; the default is one channel per block.
    """
    if n < 2:
        raise InvalidParameterError(f"need n >= 2 orderings, got {n}")
    sizes = (1,) * n if block_sizes is None else tuple(block_sizes)
    if len(sizes) != n:
        raise InvalidParameterError(f"{len(sizes)} block sizes given for n={n}")
    kind = "cyclic" if set(sizes) == {1} else "partitioned"
    return OrderingSet(_rotations(n), contiguous_blocks(sizes), kind)


def full_orderings(n: int) -> OrderingSet:
    """All ``n!`` orderings of ``n`` single-channel blocks.

    ``n = 3`` uses the layer order cyclic-first, then reversed cycles, so a
    post-selection vector ``(1, 1, 1, -1, -1, -1)/sqrt(6)`` separates the two
    classes. Other ``n`` use lexicographic order.
    """
    if n < 2:
        raise InvalidParameterError(f"need n >= 2, got {n}")
    if n > MAX_FULL_ORDER:
        raise SizeLimitError(f"{n}! orderings exceed the cap of {MAX_FULL_ORDER}!")
    orders = _FULL_ORDER_3 if n == 3 else tuple(itertools.permutations(range(n)))
    return OrderingSet(orders, contiguous_blocks((1,) * n), "full")


def block_partitions(X: int, n: int) -> list[tuple[int, ...]]:
    """Compositions of ``X`` into ``n`` positive parts, one per rotation class.

    Each class is represented by its lexicographically largest rotation and
    the list is sorted in descending order, e.g. ``(5, 3) -> [(3,1,1), (2,2,1)]``.
    """
    if n < 2 or n > X:
        raise InvalidParameterError(f"need 2 <= n <= X, got n={n}, X={X}")
    reps = set()
    for cuts in itertools.combinations(range(1, X), n - 1):
        bounds = (0,) + cuts + (X,)
        comp = tuple(bounds[i + 1] - bounds[i] for i in range(n))
        reps.add(max(comp[i:] + comp[:i] for i in range(n)))
    return sorted(reps, reverse=True)


def _unit(v, name: str, tol: float) -> np.ndarray:
    arr = np.array(v, dtype=complex).reshape(-1)
    norm = np.linalg.norm(arr)
    if abs(norm - 1) > tol:
        raise InvalidParameterError(f"{name} vector has norm {norm:.15g}, expected 1")
    arr.setflags(write=False)
    return arr


def plus_vector(dim: int) -> np.ndarray:
    return np.ones(dim, dtype=complex) / math.sqrt(dim)


def fourier_vector(dim: int, k: int) -> np.ndarray:
    """``k``-th discrete Fourier basis vector; ``k = 0`` is the uniform ``|+>``."""
    return np.exp(2j * np.pi * k * np.arange(dim) / dim) / math.sqrt(dim)


@dataclass(frozen=True, eq=False)
class ControlSpec:
    dim: int
    prep: np.ndarray
    post: np.ndarray

    def __post_init__(self):
        if self.dim < 2:
            raise InvalidParameterError(f"control dimension must be >= 2, got {self.dim}")
        prep = _unit(self.prep, "preparation", DEFAULT_TOL.algebraic)
        post = _unit(self.post, "post-selection", DEFAULT_TOL.algebraic)
        if prep.size != self.dim or post.size != self.dim:
            raise InvalidParameterError(
                f"vectors of length {prep.size}/{post.size} for control dimension {self.dim}"
            )
        object.__setattr__(self, "prep", prep)
        object.__setattr__(self, "post", post)

    @classmethod
    def plus(cls, dim: int) -> "ControlSpec":
        v = plus_vector(dim)
        return cls(dim, v, v)

    @classmethod
    def fourier(cls, dim: int, k: int) -> "ControlSpec":
        """Prepare ``|+>`` and post-select the ``k``-th Fourier outcome."""
        return cls(dim, plus_vector(dim), fourier_vector(dim, k))

    @property
    def amplitudes(self) -> np.ndarray:
        """``<post|m><m|prep>`` for each control basis state ``m``."""
        return self.post.conj() * self.prep


@dataclass(frozen=True, eq=False)
class EffectiveMap:
    """Averaged operators ``M_T`` of a post-selected switch, shape ``(N, 2, 2)``."""

    operators: np.ndarray
    amplitudes: np.ndarray
    eta: float | None = None

    def __post_init__(self):
        ops = np.array(self.operators, dtype=complex)
        ops.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    def __len__(self):
        return self.operators.shape[0]

    def gram(self) -> np.ndarray:
        """``sum_T M_T^dag M_T``; proportional to the identity for linear maps."""
        return np.einsum("kji,kjl->il", self.operators.conj(), self.operators)

    def unnormalized(self, rho: np.ndarray) -> np.ndarray:
        return apply_kraus(self.operators, np.asarray(rho, dtype=complex))

    def trace_factor(self) -> float:
        """State-independent success probability, valid when the gram is ``p * 1``."""
        return float(np.trace(self.gram()).real / 2)


def _check_sizes(ordset: OrderingSet, n_kraus: Sequence[int]):
    X = ordset.n_channels
    if X > MAX_CHANNELS:
        raise SizeLimitError(f"{X} channels exceed the brute-force cap of {MAX_CHANNELS}")
    if len(n_kraus) != X:
        raise InvalidParameterError(f"{len(n_kraus)} channels supplied for {X} slots")
    if math.prod(n_kraus) > 4**MAX_CHANNELS:
        raise SizeLimitError("Kraus tuple count exceeds the brute-force cap")


def operator_tensor(ordset: OrderingSet, slot_kraus: Sequence[np.ndarray], amplitudes) -> np.ndarray:
    """Averaged operators for every Kraus tuple, with optional leading batch axes.

    ``slot_kraus[s]`` has shape ``batch + (k_s, 2, 2)``; ``batch`` may be empty
    and broadcasts across slots. Returns ``batch + (prod k_s, 2, 2)`` with
    tuples flattened in C order (slot 0 most significant).
    """
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.shape != (ordset.dim,):
        raise InvalidParameterError(
            f"{amplitudes.size} control amplitudes for {ordset.dim} orderings"
        )
    slot_kraus = [np.asarray(k, dtype=complex) for k in slot_kraus]
    ks = [k.shape[-3] for k in slot_kraus]
    _check_sizes(ordset, ks)
    X = ordset.n_channels
    batch = np.broadcast_shapes(*(k.shape[:-3] for k in slot_kraus))

    def placed(slot: int) -> np.ndarray:
        k = np.broadcast_to(slot_kraus[slot], batch + slot_kraus[slot].shape[-3:])
        axes = [1] * X
        axes[slot] = ks[slot]
        return k.reshape(batch + tuple(axes) + (2, 2))

    composites = []
    for block in ordset.blocks:
        prod = placed(block[0])
        for slot in block[1:]:
            prod = placed(slot) @ prod
        composites.append(prod)

    total = None
    for amp, order in zip(amplitudes, ordset.orderings):
        if amp == 0:
            continue
        prod = composites[order[0]]
        for b in order[1:]:
            prod = composites[b] @ prod
        term = amp * prod
        total = term if total is None else total + term
    full_shape = batch + tuple(ks) + (2, 2)
    if total is None:
        return np.zeros(batch + (math.prod(ks), 2, 2), dtype=complex)
    return np.broadcast_to(total, full_shape).reshape(batch + (math.prod(ks), 2, 2))


def effective_operators(
    ordset: OrderingSet,
    channels: Sequence[KrausSet],
    ctrl: ControlSpec,
    eta: float | None = None,
) -> EffectiveMap:
    """Post-selected averaged operators for explicit channels, one per slot."""
    if ctrl.dim != ordset.dim:
        raise InvalidParameterError(
            f"control dimension {ctrl.dim} does not match {ordset.dim} orderings"
        )
    if len(channels) != ordset.n_channels:
        raise InvalidParameterError(
            f"{len(channels)} channels supplied for {ordset.n_channels} slots"
        )
    ops = operator_tensor(ordset, [c.operators for c in channels], ctrl.amplitudes)
    return EffectiveMap(ops, ctrl.amplitudes, eta)


def superchannel_operators(ordset: OrderingSet, channels: Sequence[KrausSet]) -> np.ndarray:
    """Joint target-control Kraus operators ``S_T = sum_m P_m(T) (x) |m><m|``.

    Shape ``(N, 2 * dim, 2 * dim)`` with the target as the first tensor factor.
    """
    dim = ordset.dim
    blocks = []
    for m in range(dim):
        onehot = np.zeros(dim, dtype=complex)
        onehot[m] = 1
        sub = OrderingSet((ordset.orderings[m],), ordset.blocks)
        blocks.append(operator_tensor(sub, [c.operators for c in channels], [1.0]))
    n_t = blocks[0].shape[0]
    S = np.zeros((n_t, 2, dim, 2, dim), dtype=complex)
    for m, P in enumerate(blocks):
        S[:, :, m, :, m] = P
    return S.reshape(n_t, 2 * dim, 2 * dim)


def post_selected_via_superchannel(
    ordset: OrderingSet, channels: Sequence[KrausSet], ctrl: ControlSpec, rho0: np.ndarray
) -> np.ndarray:
    """Unnormalized ``<post| sum_T S_T (rho0 (x) w) S_T^dag |post>`` with ``w = |prep><prep|``.

    Independent of :func:`operator_tensor`'s averaging; used as an oracle.
    """
    S = superchannel_operators(ordset, channels)
    omega = np.outer(ctrl.prep, ctrl.prep.conj())
    joint = apply_kraus(S, np.kron(np.asarray(rho0, dtype=complex), omega))
    dim = ctrl.dim
    joint = joint.reshape(2, dim, 2, dim)
    return np.einsum("m,imjn,n->ij", ctrl.post.conj(), joint, ctrl.post)


def switched_state(emap: EffectiveMap, rho0: DensityMatrix) -> tuple[DensityMatrix, float]:
    """Normalized post-selected state and its success probability.

    Raises :class:`DegeneratePostSelectionError` if the probability is below
    ``1e-12``.
    """
    sigma = emap.unnormalized(rho0.matrix)
    prob = float(np.trace(sigma).real)
    if prob < DEGENERATE_PROBABILITY:
        raise DegeneratePostSelectionError(f"post-selection probability {prob:.3e} is degenerate")
    sigma = sigma / prob
    sigma = 0.5 * (sigma + dagger(sigma))
    return DensityMatrix(sigma, tol=DEFAULT_TOL.iterated), prob


@dataclass(frozen=True)
class TransferFactors:
    """Isotropic-depolarizing view of a post-selected map.

    ``offdiag`` is the coherence factor C (probe ``|+><+|``), ``diag`` the
    population factor A - B (probe ``|0><0|``) and ``probability`` the trace
    factor ``Tr(gram)/2``. Arrays follow the batch shape of the input.
    """

    offdiag: np.ndarray
    diag: np.ndarray
    probability: np.ndarray


def transfer_factors_of(ops: np.ndarray) -> TransferFactors:
    sp = apply_kraus(ops, KET_PLUS.matrix)
    s0 = apply_kraus(ops, KET0.matrix)
    tr_p = np.trace(sp, axis1=-2, axis2=-1).real
    tr_0 = np.trace(s0, axis1=-2, axis2=-1).real
    with np.errstate(divide="ignore", invalid="ignore"):
        c = 2 * sp[..., 0, 1].real / tr_p
        d = (s0[..., 0, 0] - s0[..., 1, 1]).real / tr_0
    return TransferFactors(c, d, 0.5 * (tr_p + tr_0))


@dataclass(frozen=True, eq=False)
class SwitchConfig:
    """Orderings plus control, driven by identical equal-rate channels.

    ``effective_map(eta)`` is the map builder used by the dynamics module.
    """

    orderings: OrderingSet
    control: ControlSpec
    label: str = field(default="")

    def __post_init__(self):
        if self.control.dim != self.orderings.dim:
            raise InvalidParameterError(
                f"control dimension {self.control.dim} does not match {self.orderings.dim} orderings"
            )

    @classmethod
    def cyclic(cls, n: int, post_index: int = 0) -> "SwitchConfig":
        return cls.partitioned((1,) * n, post_index)

    @classmethod
    def partitioned(cls, sizes: Sequence[int], post_index: int = 0) -> "SwitchConfig":
        sizes = tuple(sizes)
        n = len(sizes)
        ords = cyclic_orderings(n, sizes)
        tag = "+" if post_index == 0 else f"F{post_index}"
        label = f"cyclic-{n}" if ords.kind == "cyclic" else f"partition{sizes}"
        return cls(ords, ControlSpec.fourier(n, post_index), f"{label}[{tag}]")

    @classmethod
    def full(cls, X: int = 3, post=None) -> "SwitchConfig":
        ords = full_orderings(X)
        dim = ords.dim
        if post is None:
            if dim != MINUS_VECTOR_6.size:
                raise InvalidParameterError("default post-selection vector is defined for X=3 only")
            post = MINUS_VECTOR_6
        return cls(ords, ControlSpec(dim, plus_vector(dim), post), f"full-{dim}(X={X})")

    def channels_at(self, eta: float) -> list[KrausSet]:
        k = KrausSet(equal_rate_kraus(eta))
        return [k] * self.orderings.n_channels

    def effective_map(self, eta: float) -> EffectiveMap:
        return effective_operators(self.orderings, self.channels_at(eta), self.control, eta)

    def effective_map_from(self, channels: Sequence[KrausSet]) -> EffectiveMap:
        return effective_operators(self.orderings, channels, self.control)

    def factors(self, etas) -> TransferFactors:
        """Transfer factors at one or many ``eta`` values, evaluated in chunks."""
        etas = np.asarray(etas, dtype=float)
        flat = etas.reshape(-1)
        n_tuples = 4**self.orderings.n_channels
        chunk = max(1, _CHUNK_ELEMENTS // n_tuples)
        parts = []
        for start in range(0, flat.size, chunk):
            k = equal_rate_kraus(flat[start:start + chunk])
            ops = operator_tensor(
                self.orderings, [k] * self.orderings.n_channels, self.control.amplitudes
            )
            parts.append(transfer_factors_of(ops))
        cat = lambda name: np.concatenate([getattr(p, name) for p in parts]).reshape(etas.shape)
        return TransferFactors(cat("offdiag"), cat("diag"), cat("probability"))
