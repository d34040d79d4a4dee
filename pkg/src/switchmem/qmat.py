"""Dense 2x2 complex algebra: density matrices, Kraus sets, trace distance.

Matrices are plain ``numpy`` arrays of shape ``(2, 2)`` and dtype ``complex128``.
Value types wrap read-only copies so they can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import InvalidChannelError, InvalidStateError


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances used by invariant checks.

    ``algebraic`` applies to exact identities (completeness, Hermiticity,
    unit trace); ``iterated`` to quantities built from long products or
    finite differences.
    """

    algebraic: float = 1e-12
    iterated: float = 1e-9


DEFAULT_TOL = Tolerances()

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    arr.setflags(write=False)
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def hermitian_eigvals(h: np.ndarray) -> tuple[float, float]:
    """Eigenvalues of a 2x2 Hermitian matrix from the characteristic quadratic.

    Returned in ascending order.
    """
    a = h[0, 0].real
    d = h[1, 1].real
    b = h[0, 1]
    mean = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), abs(b))
    return mean - radius, mean + radius


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A qubit state.

    The default constructor validates Hermiticity, unit trace and positivity
    eagerly. Use :meth:`unchecked` for unnormalized intermediates.
    """

    matrix: np.ndarray
    tol: float = field(default=DEFAULT_TOL.algebraic, repr=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.shape != (2, 2):
            raise InvalidStateError(f"expected a 2x2 matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidStateError("matrix has non-finite entries")
        object.__setattr__(self, "matrix", m)
        self._validate()

    def _validate(self):
        m, tol = self.matrix, self.tol
        herm = np.max(np.abs(m - dagger(m)))
        if herm > tol:
            raise InvalidStateError(f"not Hermitian (residual {herm:.3e})")
        tr = np.trace(m)
        if abs(tr - 1) > tol:
            raise InvalidStateError(f"trace {tr.real:.15g} differs from 1")
        lo, _ = hermitian_eigvals(m)
        if lo < -tol:
            raise InvalidStateError(f"negative eigenvalue {lo:.3e}")

    @classmethod
    def unchecked(cls, matrix) -> "DensityMatrix":
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", _frozen(matrix))
        object.__setattr__(obj, "tol", DEFAULT_TOL.algebraic)
        return obj

    @classmethod
    def from_bloch(cls, n: Sequence[float]) -> "DensityMatrix":
        n1, n2, n3 = (float(x) for x in n)
        return cls(0.5 * (IDENTITY + n1 * SIGMA_X + n2 * SIGMA_Y + n3 * SIGMA_Z))

    @classmethod
    def from_ket(cls, psi: Sequence[complex]) -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(0.5 * IDENTITY)

    @property
    def bloch(self) -> np.ndarray:
        m = self.matrix
        return np.array([2 * m[0, 1].real, -2 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real])

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash(self.matrix.tobytes())


# Frequently used states.
KET0 = DensityMatrix(np.diag([1.0, 0.0]))
KET1 = DensityMatrix(np.diag([0.0, 1.0]))
KET_PLUS = DensityMatrix(np.full((2, 2), 0.5))
MAX_MIXED = DensityMatrix.maximally_mixed()


@dataclass(frozen=True, eq=False)
class KrausSet:
    """An ordered list of 2x2 Kraus operators, stored as a ``(k, 2, 2)`` array.

    Completeness is *not* enforced on construction so that defective sets can
    be represented and diagnosed with :func:`check_completeness`.
    """

    operators: np.ndarray

    def __post_init__(self):
        ops = _frozen(self.operators)
        if ops.ndim != 3 or ops.shape[1:] != (2, 2):
            raise InvalidChannelError(f"expected shape (k, 2, 2), got {ops.shape}")
        if not np.all(np.isfinite(ops)):
            raise InvalidChannelError("Kraus operators have non-finite entries")
        object.__setattr__(self, "operators", ops)

    @classmethod
    def of(cls, ops: Iterable) -> "KrausSet":
        return cls(np.stack([np.asarray(o, dtype=complex) for o in ops]))

    def __len__(self):
        return self.operators.shape[0]

    def __iter__(self):
        return iter(self.operators)


class CompletenessCheck(NamedTuple):
    passed: bool
    residual: float


def check_completeness(kraus: KrausSet, tol: float = DEFAULT_TOL.algebraic) -> CompletenessCheck:
    """Report ``||sum K^dag K - 1||`` (spectral norm) and whether it is within ``tol``."""
    k = kraus.operators
    gram = np.einsum("kji,kjl->il", k.conj(), k)
    residual = float(np.linalg.norm(gram - IDENTITY, ord=2))
    return CompletenessCheck(residual <= tol, residual)


def apply_kraus(ops: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Unnormalized ``sum_k K rho K^dag`` for a ``(..., k, 2, 2)`` stack."""
    return np.einsum("...kij,jl,...kml->...im", ops, rho, ops.conj())


def apply_channel(kraus: KrausSet, rho: DensityMatrix, tol: float = DEFAULT_TOL.algebraic) -> DensityMatrix:
    check = check_completeness(kraus, tol)
    if not check.passed:
        raise InvalidChannelError(f"Kraus set is not trace preserving (residual {check.residual:.3e})")
    out = apply_kraus(kraus.operators, rho.matrix)
    out = 0.5 * (out + dagger(out))
    return DensityMatrix(out, tol=max(tol, DEFAULT_TOL.algebraic))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Trace norm ``Tr|a - b|``, in ``[0, 2]`` for states.

    No factor 1/2: orthogonal pure states are at distance 2.
    """
    lo, hi = hermitian_eigvals(a.matrix - b.matrix)
    return float(abs(lo) + abs(hi))


def random_density_matrix(rng: np.random.Generator, pure: bool = False) -> DensityMatrix:
    """Uniform draw from the Bloch ball (or sphere when ``pure``)."""
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    r = 1.0 if pure else rng.uniform() ** (1 / 3)
    return DensityMatrix.from_bloch(r * v)


def random_kraus_set(rng: np.random.Generator, k: int = 4) -> KrausSet:
    """A random CPTP map obtained from a Haar-ish isometry ``C^2 -> C^{2k}``."""
    z = rng.normal(size=(2 * k, 2)) + 1j * rng.normal(size=(2 * k, 2))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return KrausSet(q.reshape(k, 2, 2))


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
