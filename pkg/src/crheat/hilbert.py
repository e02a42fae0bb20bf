"""Operators and states on a qubit coupled to a truncated boson mode.

The composite space is C^2 (x) C^N with qubit-major ordering: basis state
``|q, n>`` lives at flat index ``q * N + n``, so a Kronecker product
``kron(A, B)`` always has the qubit factor on the left.

Operators are kept as immutable sparse coordinate triplets.  After every
construction or arithmetic operation the entries are deduplicated, sorted
by (row, col) and stripped of exact zeros, so two operators are equal iff
their triplets compare equal.  Dense matrices are only materialised where
an eigen- or linear solve actually needs them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as _sp

from .errors import (
    DegenerateStateError,
    DimensionMismatchError,
    InvalidDimensionError,
    StateInvariantError,
)

__all__ = [
    "SpaceSpec",
    "LinOp",
    "Ket",
    "DensityOp",
    "identity",
    "destroy",
    "sigma_minus",
    "kron",
    "dag",
    "expect",
    "partial_trace",
    "normalize",
    "basis_ket",
]

#: Tolerances baked into the state types.
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-9
NORM_TOL = 1e-10


def _check_dim(dim: int, minimum: int = 1) -> int:
    if not isinstance(dim, (int, np.integer)) or isinstance(dim, bool):
        raise InvalidDimensionError(f"dimension must be an integer, got {dim!r}")
    if dim < minimum:
        raise InvalidDimensionError(f"dimension must be >= {minimum}, got {dim}")
    return int(dim)


@dataclass(frozen=True)
class SpaceSpec:
    """Shape of the composite Hilbert space.

    Parameters
    ----------
    fock_cutoff : int
        Number of retained Fock states ``|0> .. |N-1>`` of the boson mode.
        Must be at least 2 so the mode can hold an excitation.
    """

    fock_cutoff: int
    qubit_dim: int = field(default=2)

    def __post_init__(self):
        _check_dim(self.fock_cutoff, minimum=2)
        if self.qubit_dim != 2:
            raise InvalidDimensionError(
                f"qubit_dim is fixed at 2, got {self.qubit_dim}"
            )

    @property
    def total_dim(self) -> int:
        return self.qubit_dim * self.fock_cutoff

    def index(self, q: int, n: int) -> int:
        """Flat index of the basis state ``|q, n>`` (qubit-major)."""
        if q not in (0, 1):
            raise InvalidDimensionError(f"qubit index must be 0 or 1, got {q}")
        if not 0 <= n < self.fock_cutoff:
            raise InvalidDimensionError(
                f"Fock index must lie in [0, {self.fock_cutoff}), got {n}"
            )
        return q * self.fock_cutoff + n


@dataclass(frozen=True, eq=False)
class LinOp:
    """Sparse linear operator on a ``dim``-dimensional space.

    Stored as coordinate triplets ``(rows, cols, vals)``.  Instances are
    immutable; every constructor canonicalises the triplets (duplicates
    summed, exact zeros dropped, sorted by row then column), so equality
    of canonical forms is equality of operators.

    Construct via the module helpers (:func:`destroy`, :func:`identity`,
    :func:`kron`, ...) or :meth:`from_entries` / :meth:`from_dense`.
    """

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self):
        d = _check_dim(self.dim)
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        vals = np.asarray(self.vals, dtype=np.complex128).ravel()
        if not (rows.shape == cols.shape == vals.shape):
            raise DimensionMismatchError(
                "rows, cols and vals must have identical lengths"
            )
        if rows.size:
            if rows.min() < 0 or rows.max() >= d or cols.min() < 0 or cols.max() >= d:
                raise InvalidDimensionError(
                    f"coordinate outside [0, {d}) in operator entries"
                )
            if not np.all(np.isfinite(vals)):
                raise StateInvariantError("operator entries must be finite")
            # Canonical form: sort, merge duplicates, drop exact zeros.
            order = np.lexsort((cols, rows))
            rows, cols, vals = rows[order], cols[order], vals[order]
            if rows.size > 1:
                same = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
                if same.any():
                    keep = np.concatenate(([True], ~same))
                    group = np.cumsum(keep) - 1
                    merged = np.zeros(int(group[-1]) + 1, dtype=np.complex128)
                    np.add.at(merged, group, vals)
                    rows, cols, vals = rows[keep], cols[keep], merged
            nz = vals != 0
            rows, cols, vals = rows[nz], cols[nz], vals[nz]
        for name, arr in (("rows", rows), ("cols", cols), ("vals", vals)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "dim", d)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_entries(cls, dim: int, entries) -> "LinOp":
        """Build from an iterable of ``(row, col, value)`` triplets."""
        entries = list(entries)
        if not entries:
            return cls(dim, np.empty(0, np.int64), np.empty(0, np.int64),
                       np.empty(0, np.complex128))
        rows, cols, vals = zip(*entries)
        return cls(dim, np.array(rows), np.array(cols), np.array(vals))

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> "LinOp":
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got {m.shape}")
        rows, cols = np.nonzero(m)
        return cls(m.shape[0], rows, cols, m[rows, cols])

    # -- views --------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        out[self.rows, self.cols] = self.vals
        return out

    def to_csr(self) -> _sp.csr_matrix:
        return _sp.csr_matrix(
            (self.vals, (self.rows, self.cols)), shape=(self.dim, self.dim)
        )

    def entries(self) -> list[tuple[int, int, complex]]:
        """Canonically ordered ``(row, col, value)`` triplets."""
        return [
            (int(r), int(c), complex(v))
            for r, c, v in zip(self.rows, self.cols, self.vals)
        ]

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    # -- algebra ------------------------------------------------------

    def _same_dim(self, other: "LinOp") -> None:
        if self.dim != other.dim:
            raise DimensionMismatchError(
                f"operator dimensions differ: {self.dim} vs {other.dim}"
            )

    def __add__(self, other: "LinOp") -> "LinOp":
        if not isinstance(other, LinOp):
            return NotImplemented
        self._same_dim(other)
        return LinOp(
            self.dim,
            np.concatenate([self.rows, other.rows]),
            np.concatenate([self.cols, other.cols]),
            np.concatenate([self.vals, other.vals]),
        )

    def __sub__(self, other: "LinOp") -> "LinOp":
        if not isinstance(other, LinOp):
            return NotImplemented
        return self + (-1.0) * other

    def __neg__(self) -> "LinOp":
        return (-1.0) * self

    def __mul__(self, scalar) -> "LinOp":
        if not np.isscalar(scalar):
            return NotImplemented
        return LinOp(self.dim, self.rows, self.cols, self.vals * complex(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "LinOp") -> "LinOp":
        if not isinstance(other, LinOp):
            return NotImplemented
        self._same_dim(other)
        prod = (self.to_csr() @ other.to_csr()).tocoo()
        return LinOp(self.dim, prod.row, prod.col, prod.data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinOp):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, other.vals)
        )

    def __hash__(self):
        return hash((self.dim, self.vals.tobytes(),
                     self.rows.tobytes(), self.cols.tobytes()))

    def dag(self) -> "LinOp":
        """Hermitian adjoint.  Exact: entries are swapped and conjugated."""
        return LinOp(self.dim, self.cols, self.rows, np.conj(self.vals))

    def hermiticity_defect(self) -> float:
        """Largest entrywise magnitude of ``A - A^dagger``."""
        diff = self - self.dag()
        return float(np.abs(diff.vals).max()) if diff.nnz else 0.0


@dataclass(frozen=True, eq=False)
class Ket:
    """Pure state vector.  Amplitudes are stored as an immutable
    complex array; no normalisation is imposed at construction (use
    :func:`normalize`)."""

    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        d = _check_dim(self.dim)
        amps = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if amps.size != d:
            raise DimensionMismatchError(
                f"expected {d} amplitudes, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise StateInvariantError("amplitudes must be finite")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dim", d)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_density(self) -> "DensityOp":
        """Outer product ``|psi><psi|`` (requires a normalised ket)."""
        return DensityOp(self.dim, np.outer(self.amplitudes,
                                            np.conj(self.amplitudes)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ket):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(
            self.amplitudes, other.amplitudes
        )

    def __hash__(self):
        return hash((self.dim, self.amplitudes.tobytes()))


@dataclass(frozen=True, eq=False)
class DensityOp:
    """Density operator, validated at construction.

    Invariants (each checked, violation raises
    :class:`~crheat.errors.StateInvariantError`):

    * Hermitian within ``1e-10`` (entrywise),
    * unit trace within ``1e-10``,
    * smallest eigenvalue ``>= -1e-9``.
    """

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        d = _check_dim(self.dim)
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (d, d):
            raise DimensionMismatchError(
                f"expected a {d}x{d} matrix, got {m.shape}"
            )
        if not np.all(np.isfinite(m)):
            raise StateInvariantError("density matrix entries must be finite")
        herm = float(np.abs(m - m.conj().T).max()) if d else 0.0
        if herm > HERMITICITY_TOL:
            raise StateInvariantError(
                f"density matrix is not Hermitian: defect {herm:.3e} > {HERMITICITY_TOL}"
            )
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateInvariantError(
                f"density matrix trace {tr!r} deviates from 1 by more than {TRACE_TOL}"
            )
        lo = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        if lo < -POSITIVITY_TOL:
            raise StateInvariantError(
                f"density matrix has eigenvalue {lo:.3e} < -{POSITIVITY_TOL}"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "_min_eig", lo)
        object.__setattr__(self, "_herm_defect", herm)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def trace_error(self) -> float:
        return abs(self.trace() - 1.0)

    def min_eigenvalue(self) -> float:
        return self._min_eig

    def hermiticity_defect(self) -> float:
        return self._herm_defect

    def __eq__(self, other) -> bool:
        if not isinstance(other, DensityOp):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.dim, self.matrix.tobytes()))


# -- operator factories ----------------------------------------------


def identity(dim: int) -> LinOp:
    """Identity operator on a ``dim``-dimensional space."""
    d = _check_dim(dim)
    idx = np.arange(d, dtype=np.int64)
    return LinOp(d, idx, idx, np.ones(d, dtype=np.complex128))


def destroy(fock_cutoff: int) -> LinOp:
    """Truncated bosonic annihilation operator.

    Entries ``<n-1| b |n> = sqrt(n)`` for ``n = 1 .. N-1``.  Note that on
    the truncated space ``b b^dag - b^dag b`` is not the identity: its
    last diagonal entry is ``-(N-1)``, an unavoidable cutoff artifact.

    Parameters
    ----------
    fock_cutoff : int
        Retained Fock dimension, at least 2.
    """
    n = _check_dim(fock_cutoff, minimum=2)
    ks = np.arange(1, n, dtype=np.int64)
    return LinOp(n, ks - 1, ks, np.sqrt(ks).astype(np.complex128))


def sigma_minus() -> LinOp:
    """Qubit lowering operator ``|0><1|`` on C^2."""
    return LinOp.from_entries(2, [(0, 1, 1.0)])


def kron(a: LinOp, b: LinOp) -> LinOp:
    """Kronecker product with ``a`` acting on the left (qubit) factor."""
    prod = _sp.kron(a.to_csr(), b.to_csr(), format="coo")
    return LinOp(a.dim * b.dim, prod.row, prod.col, prod.data)


def dag(a: LinOp) -> LinOp:
    """Hermitian adjoint of ``a`` (see :meth:`LinOp.dag`)."""
    return a.dag()


# -- state operations ------------------------------------------------


def basis_ket(dim: int, index: int) -> Ket:
    """Computational basis vector ``|index>``."""
    d = _check_dim(dim)
    if not 0 <= index < d:
        raise InvalidDimensionError(f"basis index {index} outside [0, {d})")
    amps = np.zeros(d, dtype=np.complex128)
    amps[index] = 1.0
    return Ket(d, amps)


def normalize(psi: Ket) -> Ket:
    """Return ``psi`` scaled to unit norm.

    Raises
    ------
    DegenerateStateError
        If the vector has zero norm (nothing to normalise).
    """
    nrm = psi.norm()
    if nrm == 0.0:
        raise DegenerateStateError("cannot normalise a zero vector")
    return Ket(psi.dim, psi.amplitudes / nrm)


def expect(op: LinOp, state: Ket | DensityOp) -> complex:
    """Expectation value ``<psi|A|psi>`` or ``Tr(A rho)``.

    Works directly on the sparse triplets, so the cost is proportional
    to the number of nonzero entries of ``op``.
    """
    if isinstance(state, Ket):
        if op.dim != state.dim:
            raise DimensionMismatchError(
                f"operator dim {op.dim} != state dim {state.dim}"
            )
        psi = state.amplitudes
        return complex(
            np.sum(np.conj(psi[op.rows]) * op.vals * psi[op.cols])
        )
    if isinstance(state, DensityOp):
        if op.dim != state.dim:
            raise DimensionMismatchError(
                f"operator dim {op.dim} != state dim {state.dim}"
            )
        # Tr(A rho) = sum_ij A[i, j] rho[j, i]
        return complex(np.sum(op.vals * state.matrix[op.cols, op.rows]))
    raise TypeError(f"expected Ket or DensityOp, got {type(state).__name__}")


def partial_trace(rho: DensityOp, keep: str, space: SpaceSpec) -> DensityOp:
    """Reduced state of subsystem ``"A"`` (qubit) or ``"B"`` (boson).

    Parameters
    ----------
    rho : DensityOp
        State on the composite space ``space``.
    keep : {"A", "B"}
        Which factor survives the trace.
    space : SpaceSpec
        Shape of the composite space; ``rho.dim`` must match.
    """
    if keep not in ("A", "B"):
        raise ValueError(f'keep must be "A" or "B", got {keep!r}')
    if rho.dim != space.total_dim:
        raise DimensionMismatchError(
            f"state dim {rho.dim} != space dim {space.total_dim}"
        )
    n = space.fock_cutoff
    blocks = rho.matrix.reshape(2, n, 2, n)
    if keep == "A":
        reduced = np.einsum("injn->ij", blocks)
    else:
        reduced = np.einsum("imin->mn", blocks)
    return DensityOp(reduced.shape[0], reduced)
