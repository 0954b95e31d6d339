"""Exact dense quantum mechanics over the labelled subsystems A, B and E.

States and operators carry an ordered tuple of :class:`Subsystem` labels.  The
order is always canonical (A, B, E); :func:`tensor` and the embedding used by
:func:`apply` permute data into that order, so callers never deal with index
permutations themselves.

All objects are immutable: their arrays are copied on construction and marked
read-only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .linalg import jacobi_eigvalsh

__all__ = [
    "ATOL",
    "MAX_DIM",
    "Kind",
    "Subsystem",
    "QuantumState",
    "Operator",
    "A",
    "B",
    "ancilla",
    "tensor",
    "apply",
    "partial_trace",
    "born_probability",
    "von_neumann_entropy",
    "inner",
    "equal_up_to_phase",
    "basis_state",
    "identity",
    "projector",
    "pauli_x",
    "pauli_z",
    "hadamard",
    "psi_minus",
    "psi_plus",
    "phi_minus",
    "phi_plus",
    "bell_projectors",
    "sample_projective",
]

ATOL = 1e-10
MAX_DIM = 64
CANONICAL_ORDER = ("A", "B", "E")


class Kind(enum.Enum):
    PURE = "pure"
    DENSITY = "density"


@dataclass(frozen=True)
class Subsystem:
    """A labelled tensor factor. A and B are qubits, E has any dimension >= 1."""

    name: str
    dim: int

    def __post_init__(self):
        if self.name not in CANONICAL_ORDER:
            raise ValueError(f"unknown subsystem {self.name!r}; expected one of {CANONICAL_ORDER}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"subsystem dimension must be a positive integer, got {self.dim}")
        if self.name in ("A", "B") and self.dim != 2:
            raise ValueError(f"subsystem {self.name} must have dimension 2")


A = Subsystem("A", 2)
B = Subsystem("B", 2)


def ancilla(dim: int) -> Subsystem:
    return Subsystem("E", dim)


SubsystemsLike = Union[Subsystem, Sequence[Subsystem]]


def _as_subsystems(subsystems: SubsystemsLike) -> tuple[Subsystem, ...]:
    if isinstance(subsystems, Subsystem):
        subsystems = (subsystems,)
    subs = tuple(subsystems)
    if not subs:
        raise ValueError("at least one subsystem is required")
    names = [s.name for s in subs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate subsystem labels: {names}")
    if names != sorted(names, key=CANONICAL_ORDER.index):
        raise ValueError(f"subsystems must be listed in canonical order A, B, E, got {names}")
    total = int(np.prod([s.dim for s in subs]))
    if total > MAX_DIM:
        raise ValueError(f"total dimension {total} exceeds the configured maximum {MAX_DIM}")
    return subs


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.complex128, copy=True)
    if not np.all(np.isfinite(out)):
        raise ValueError("amplitudes must be finite")
    out.setflags(write=False)
    return out


def _dims(subs: Sequence[Subsystem]) -> tuple[int, ...]:
    return tuple(s.dim for s in subs)


@dataclass(frozen=True)
class QuantumState:
    """A pure vector or a density matrix over canonical-ordered subsystems.

    The kind is inferred from ``data.ndim``: 1-D arrays are pure vectors,
    2-D arrays are density matrices.
    """

    subsystems: tuple[Subsystem, ...]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        subs = _as_subsystems(self.subsystems)
        data = _frozen(self.data)
        dim = int(np.prod(_dims(subs)))
        if data.ndim == 1:
            if data.shape != (dim,):
                raise ValueError(f"vector of length {data.shape[0]} does not match dimension {dim}")
            norm = np.linalg.norm(data)
            if abs(norm - 1.0) > ATOL:
                raise ValueError(f"pure state must have unit norm, got {norm:.12g}")
        elif data.ndim == 2:
            if data.shape != (dim, dim):
                raise ValueError(f"density matrix of shape {data.shape} does not match dimension {dim}")
            if np.max(np.abs(data - data.conj().T)) > ATOL:
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(data)
            if abs(tr - 1.0) > ATOL:
                raise ValueError(f"density matrix must have unit trace, got {tr:.12g}")
            if np.linalg.eigvalsh(data).min() < -ATOL:
                raise ValueError("density matrix has negative eigenvalues")
        else:
            raise ValueError("state data must be a vector or a square matrix")
        object.__setattr__(self, "subsystems", subs)
        object.__setattr__(self, "data", data)

    @property
    def kind(self) -> Kind:
        return Kind.PURE if self.data.ndim == 1 else Kind.DENSITY

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.subsystems)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.subsystems)

    def density_matrix(self) -> np.ndarray:
        if self.kind is Kind.PURE:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def to_density(self) -> "QuantumState":
        if self.kind is Kind.DENSITY:
            return self
        return QuantumState(self.subsystems, self.density_matrix())

    def __neg__(self) -> "QuantumState":
        return QuantumState(self.subsystems, -self.data)


@dataclass(frozen=True)
class Operator:
    """A square matrix acting on the listed subsystems.

    ``unitary=True`` is a claim checked at construction (``U U^dagger = I``).
    """

    subsystems: tuple[Subsystem, ...]
    matrix: np.ndarray = field(repr=False)
    unitary: bool = False

    def __post_init__(self):
        subs = _as_subsystems(self.subsystems)
        m = _frozen(self.matrix)
        dim = int(np.prod(_dims(subs)))
        if m.shape != (dim, dim):
            raise ValueError(f"operator of shape {m.shape} does not act on dimension {dim}")
        if self.unitary and np.max(np.abs(m @ m.conj().T - np.eye(dim))) > ATOL:
            raise ValueError("operator flagged unitary but U U^dagger != I")
        object.__setattr__(self, "subsystems", subs)
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self) -> tuple[int, ...]:
        return _dims(self.subsystems)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.subsystems)

    @property
    def dagger(self) -> "Operator":
        return Operator(self.subsystems, self.matrix.conj().T, self.unitary)

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.subsystems != other.subsystems:
            raise ValueError("operator product needs identical subsystems")
        return Operator(self.subsystems, self.matrix @ other.matrix, self.unitary and other.unitary)

    def __add__(self, other: "Operator") -> "Operator":
        if self.subsystems != other.subsystems:
            raise ValueError("operator sum needs identical subsystems")
        return Operator(self.subsystems, self.matrix + other.matrix)

    def embed(self, subsystems: SubsystemsLike) -> "Operator":
        """Extend with identities to act on ``subsystems`` (a superset)."""
        target = _as_subsystems(subsystems)
        if target == self.subsystems:
            return self
        return Operator(target, _embedded_matrix(self, target), self.unitary)


# --------------------------------------------------------------------------
# index permutations


def _canonical_perm(subs: Sequence[Subsystem]) -> list[int]:
    return sorted(range(len(subs)), key=lambda i: CANONICAL_ORDER.index(subs[i].name))


def _reorder_vector(vec: np.ndarray, subs: Sequence[Subsystem]) -> tuple[np.ndarray, tuple[Subsystem, ...]]:
    perm = _canonical_perm(subs)
    new_subs = tuple(subs[i] for i in perm)
    t = vec.reshape(_dims(subs)).transpose(perm)
    return t.reshape(-1), new_subs


def _reorder_matrix(mat: np.ndarray, subs: Sequence[Subsystem]) -> tuple[np.ndarray, tuple[Subsystem, ...]]:
    perm = _canonical_perm(subs)
    n = len(subs)
    new_subs = tuple(subs[i] for i in perm)
    dims = _dims(subs)
    t = mat.reshape(dims + dims).transpose(perm + [p + n for p in perm])
    d = int(np.prod(dims))
    return t.reshape(d, d), new_subs


def _embedded_matrix(op: Operator, target: tuple[Subsystem, ...]) -> np.ndarray:
    names = [s.name for s in target]
    for s in op.subsystems:
        if s not in target:
            raise ValueError(f"operator acts on {s}, which is not among {names}")
    rest = tuple(s for s in target if s not in op.subsystems)
    rest_dim = int(np.prod(_dims(rest))) if rest else 1
    full = np.kron(op.matrix, np.eye(rest_dim))
    mat, _ = _reorder_matrix(full, op.subsystems + rest)
    return mat


# --------------------------------------------------------------------------
# core operations


def tensor(a, b):
    """Tensor product of two states or two operators on disjoint subsystems.

    The result is permuted into canonical subsystem order.  Mixing a pure
    vector with a density matrix yields a density matrix.
    """
    if isinstance(a, Operator) and isinstance(b, Operator):
        _check_disjoint(a.subsystems, b.subsystems)
        mat, subs = _reorder_matrix(np.kron(a.matrix, b.matrix), a.subsystems + b.subsystems)
        return Operator(subs, mat, a.unitary and b.unitary)
    if isinstance(a, QuantumState) and isinstance(b, QuantumState):
        _check_disjoint(a.subsystems, b.subsystems)
        raw_subs = a.subsystems + b.subsystems
        if a.kind is Kind.PURE and b.kind is Kind.PURE:
            vec, subs = _reorder_vector(np.kron(a.data, b.data), raw_subs)
            return QuantumState(subs, vec)
        mat, subs = _reorder_matrix(np.kron(a.density_matrix(), b.density_matrix()), raw_subs)
        return QuantumState(subs, mat)
    raise TypeError("tensor() needs two QuantumState or two Operator arguments")


def _check_disjoint(x: Sequence[Subsystem], y: Sequence[Subsystem]) -> None:
    overlap = {s.name for s in x} & {s.name for s in y}
    if overlap:
        raise ValueError(f"subsystem labels overlap: {sorted(overlap)}")
    total = int(np.prod(_dims(x))) * int(np.prod(_dims(y)))
    if total > MAX_DIM:
        raise ValueError(f"total dimension {total} exceeds the configured maximum {MAX_DIM}")


def apply(op: Operator, state: QuantumState) -> QuantumState:
    """Apply ``op`` to ``state``: ``U|s>`` for vectors, ``U rho U^dagger`` for densities."""
    m = op.embed(state.subsystems).matrix
    if state.kind is Kind.PURE:
        return QuantumState(state.subsystems, m @ state.data)
    return QuantumState(state.subsystems, m @ state.data @ m.conj().T)


def _names(keep) -> set[str]:
    if isinstance(keep, (str, Subsystem)):
        keep = [keep]
    return {k.name if isinstance(k, Subsystem) else k for k in keep}


def partial_trace(state: QuantumState, keep) -> QuantumState:
    """Reduced density matrix on the subsystems named in ``keep``."""
    names = _names(keep)
    if not names:
        raise ValueError("keep must name at least one subsystem")
    unknown = names - set(state.names)
    if unknown:
        raise ValueError(f"cannot keep {sorted(unknown)}: state has {state.names}")
    kept = tuple(s for s in state.subsystems if s.name in names)
    if kept == state.subsystems:
        return state.to_density()
    dims = state.dims
    n = len(dims)
    keep_idx = [i for i, s in enumerate(state.subsystems) if s.name in names]
    trace_idx = [i for i in range(n) if i not in keep_idx]
    d_keep = int(np.prod([dims[i] for i in keep_idx]))
    d_trace = int(np.prod([dims[i] for i in trace_idx]))
    if state.kind is Kind.PURE:
        psi = state.data.reshape(dims).transpose(keep_idx + trace_idx).reshape(d_keep, d_trace)
        rho = psi @ psi.conj().T
    else:
        t = state.data.reshape(dims + dims)
        perm = keep_idx + trace_idx
        t = t.transpose(perm + [p + n for p in perm]).reshape(d_keep, d_trace, d_keep, d_trace)
        rho = np.einsum("ajbj->ab", t)
    return QuantumState(kept, rho)


def born_probability(state: QuantumState, proj: Operator) -> float:
    """Probability ``tr(P rho)`` of the projector outcome ``proj``."""
    p = proj.matrix
    if np.max(np.abs(p @ p - p)) > ATOL or np.max(np.abs(p - p.conj().T)) > ATOL:
        raise ValueError("operator is not an orthogonal projector")
    m = proj.embed(state.subsystems).matrix
    if state.kind is Kind.PURE:
        val = np.vdot(state.data, m @ state.data).real
    else:
        val = np.trace(m @ state.data).real
    if val < -ATOL or val > 1 + ATOL:
        raise ValueError(f"probability {val} outside [0, 1]")
    return float(min(max(val, 0.0), 1.0))


def von_neumann_entropy(rho) -> float:
    """Von Neumann entropy in bits, from Jacobi eigenvalues.

    Accepts a :class:`QuantumState` (pure states have zero entropy) or a raw
    Hermitian matrix.
    """
    if isinstance(rho, QuantumState):
        if rho.kind is Kind.PURE:
            return 0.0
        mat = rho.data
    else:
        mat = np.asarray(rho, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("expected a square matrix")
        if np.max(np.abs(mat - mat.conj().T)) > ATOL:
            raise ValueError("matrix is not Hermitian")
    w = jacobi_eigvalsh(mat)
    if w.min() < -1e-9:
        raise ValueError(f"matrix has a negative eigenvalue {w.min():.3g}")
    w = w[w > 1e-15]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def inner(a: QuantumState, b: QuantumState) -> complex:
    """``<a|b>`` for pure states on the same subsystems."""
    if a.kind is not Kind.PURE or b.kind is not Kind.PURE:
        raise ValueError("inner product needs pure states")
    if a.subsystems != b.subsystems:
        raise ValueError("inner product needs identical subsystems")
    return complex(np.vdot(a.data, b.data))


def equal_up_to_phase(a: QuantumState, b: QuantumState, tol: float = 1e-9) -> bool:
    return abs(abs(inner(a, b)) - 1.0) < tol


# --------------------------------------------------------------------------
# standard states and gates


def basis_state(subsystems: SubsystemsLike, index: Union[int, Sequence[int]]) -> QuantumState:
    """Computational basis vector; ``index`` is flat or one digit per subsystem."""
    subs = _as_subsystems(subsystems)
    dims = _dims(subs)
    flat = index if isinstance(index, (int, np.integer)) else int(np.ravel_multi_index(tuple(index), dims))
    vec = np.zeros(int(np.prod(dims)), dtype=np.complex128)
    vec[flat] = 1.0
    return QuantumState(subs, vec)


def identity(subsystems: SubsystemsLike) -> Operator:
    subs = _as_subsystems(subsystems)
    return Operator(subs, np.eye(int(np.prod(_dims(subs)))), unitary=True)


def projector(state: QuantumState) -> Operator:
    """``|s><s|`` for a pure state."""
    if state.kind is not Kind.PURE:
        raise ValueError("projector() needs a pure state")
    return Operator(state.subsystems, np.outer(state.data, state.data.conj()))


def pauli_z(sub: Subsystem = B) -> Operator:
    return Operator((sub,), np.diag([1.0, -1.0]), unitary=True)


def pauli_x(sub: Subsystem = B) -> Operator:
    return Operator((sub,), np.array([[0.0, 1.0], [1.0, 0.0]]), unitary=True)


def hadamard(sub: Subsystem = B) -> Operator:
    return Operator((sub,), np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2), unitary=True)


_R2 = 1 / np.sqrt(2)


def psi_minus() -> QuantumState:
    """Singlet ``(|01> - |10>)/sqrt2`` on A, B."""
    return QuantumState((A, B), [0, _R2, -_R2, 0])


def psi_plus() -> QuantumState:
    return QuantumState((A, B), [0, _R2, _R2, 0])


def phi_minus() -> QuantumState:
    return QuantumState((A, B), [_R2, 0, 0, -_R2])


def phi_plus() -> QuantumState:
    return QuantumState((A, B), [_R2, 0, 0, _R2])


def bell_projectors() -> dict[str, Operator]:
    return {
        "psi-": projector(psi_minus()),
        "psi+": projector(psi_plus()),
        "phi-": projector(phi_minus()),
        "phi+": projector(phi_plus()),
    }


def sample_projective(
    state: QuantumState,
    projectors: Sequence[Operator],
    rng: np.random.Generator,
) -> tuple[int, QuantumState]:
    """Sample a complete projective measurement and collapse the state.

    The projectors must sum to the identity on their subsystems; the index of
    the sampled outcome and the normalised post-measurement state are
    returned.
    """
    embedded = [p.embed(state.subsystems).matrix for p in projectors]
    if state.kind is Kind.PURE:
        branches = [m @ state.data for m in embedded]
        probs = np.array([np.vdot(v, v).real for v in branches])
    else:
        branches = [m @ state.data @ m for m in embedded]
        probs = np.array([np.trace(r).real for r in branches])
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError(f"projectors are not complete (probabilities sum to {probs.sum():.12g})")
    probs = np.clip(probs, 0.0, None)
    k = int(np.searchsorted(np.cumsum(probs) / probs.sum(), rng.random(), side="right"))
    k = min(k, len(probs) - 1)
    if state.kind is Kind.PURE:
        post = branches[k] / np.sqrt(probs[k])
    else:
        post = branches[k] / probs[k]
    return k, QuantumState(state.subsystems, post)
