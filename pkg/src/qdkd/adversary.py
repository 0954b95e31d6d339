"""Individual eavesdropping attacks on the travelling qubit.

Eve couples qubit B to an ``N``-dimensional ancilla prepared in ``|e>`` with a
unitary ``J`` on the way to Bob and a unitary ``K`` on the way back.  For Alice's
two possible inputs ``|psi+>``/``|psi->`` and Bob's two gates ``1``/``Z`` the
final A-B-E states are

    mu(+-) = K 1_B J (|psi+-> (x) |e>)
    nu(+-) = K Z_B J (|psi+-> (x) |e>)

From these follow the correlated-check probability ``P_corr``, the overlap
``q = <mu+|nu+>`` and Holevo bounds on what Eve can learn about either key
when she is (generously) allowed to measure all of A-B-E.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.stats import unitary_group

from . import quantum as qm
from .quantum import A, B, Operator, QuantumState

__all__ = [
    "AttackModel",
    "FinalStates",
    "AttackOutcome",
    "PcorrDiscrepancy",
    "make_attack",
    "final_states",
    "p_corr_exact",
    "p_corr_overlap",
    "q_overlap",
    "holevo_eve_bob",
    "holevo_eve_alice",
    "evaluate_attack",
    "check_p_corr_consistency",
    "rotation_sweep",
    "sweep_csv",
    "ENCODING",
]

log = logging.getLogger(__name__)

MAX_ANCILLA_DIM = 16


@dataclass(frozen=True)
class AttackModel:
    """Eve's ancilla and her two couplings ``J`` (forward) and ``K`` (return).

    ``kind`` and ``params`` only describe how the model was built, for
    serialisation; the physics lives in ``initial_ancilla``, ``J`` and ``K``.
    """

    initial_ancilla: QuantumState
    J: Operator
    K: Operator
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        e = self.initial_ancilla
        if e.names != ("E",) or e.kind is not qm.Kind.PURE:
            raise ValueError("initial ancilla must be a pure state on E")
        if not 1 <= self.ancilla_dim <= MAX_ANCILLA_DIM:
            raise ValueError(f"ancilla dimension must lie in [1, {MAX_ANCILLA_DIM}]")
        for name, op in (("J", self.J), ("K", self.K)):
            if op.names != ("B", "E") or op.subsystems[1] != e.subsystems[0]:
                raise ValueError(f"{name} must act on B (x) E with E of dimension {self.ancilla_dim}")
            if not op.unitary:
                raise ValueError(f"{name} must be flagged unitary")

    @property
    def ancilla_dim(self) -> int:
        return self.initial_ancilla.subsystems[0].dim

    @property
    def subsystems(self) -> tuple[qm.Subsystem, ...]:
        return (A, B, self.initial_ancilla.subsystems[0])

    def describe(self) -> dict:
        return {"family": self.kind, "params": dict(self.params), "ancilla_dim": self.ancilla_dim}

    def to_dict(self) -> dict:
        """Full serialisation including the matrices (real/imag split)."""

        def enc(m):
            return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}

        out = self.describe()
        out.update(initial_ancilla=enc(self.initial_ancilla.data), J=enc(self.J.matrix), K=enc(self.K.matrix))
        return out


class FinalStates(NamedTuple):
    mu_plus: QuantumState
    mu_minus: QuantumState
    nu_plus: QuantumState
    nu_minus: QuantumState


# (alice_bit, bob_bit) -> final state. Alice's bit 0 leaves the singlet
# untouched, bit 1 turns it into (minus) psi+; Bob's bit 0 is the identity
# gate (mu states), bit 1 is Z_B (nu states).
ENCODING = {
    (0, 0): "mu_minus",
    (1, 0): "mu_plus",
    (0, 1): "nu_minus",
    (1, 1): "nu_plus",
}


# --------------------------------------------------------------------------
# constructors


def _on_be(ancilla_dim: int, matrix) -> Operator:
    return Operator((B, qm.ancilla(ancilla_dim)), matrix, unitary=True)


def _ancilla_zero(n: int) -> QuantumState:
    return qm.basis_state(qm.ancilla(n), 0)


def _identity_attack() -> AttackModel:
    J = _on_be(1, np.eye(2))
    return AttackModel(_ancilla_zero(1), J, J, kind="identity")


def _intercept_resend(basis: str) -> AttackModel:
    basis = basis.upper()
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=float)
    if basis == "Z":
        J = cnot
    elif basis == "X":
        # copy B onto E in the X basis: (H (x) 1) CNOT (H (x) 1)
        h = np.kron(np.array([[1, 1], [1, -1]]) / np.sqrt(2), np.eye(2))
        J = h @ cnot @ h
    else:
        raise ValueError(f"intercept-resend basis must be Z or X, got {basis!r}")
    return AttackModel(
        _ancilla_zero(2), _on_be(2, J), _on_be(2, np.eye(4)), kind="intercept-resend", params={"basis": basis}
    )


def _rotation_matrix(theta0: float, theta1: float) -> np.ndarray:
    """Flip B with amplitude sin(theta_b) and record the flip in the ancilla.

    J|b,0> = cos(t_b)|b,0> + sin(t_b)|1-b,1>; the |b,1> columns complete the
    rotation inside the subspaces {|00>,|11>} and {|10>,|01>}.
    """
    c0, s0 = math.cos(theta0), math.sin(theta0)
    c1, s1 = math.cos(theta1), math.sin(theta1)
    m = np.zeros((4, 4))
    # basis index = 2*b + e
    m[:, 0] = [c0, 0, 0, s0]  # |00> -> c|00> + s|11>
    m[:, 3] = [-s0, 0, 0, c0]  # |11> -> -s|00> + c|11>
    m[:, 2] = [0, s1, c1, 0]  # |10> -> c|10> + s|01>
    m[:, 1] = [0, c1, -s1, 0]  # |01> -> c|01> - s|10>
    return m


def _check_angle(name: str, theta: float) -> float:
    theta = float(theta)
    if not (math.isfinite(theta) and 0.0 <= theta <= math.pi / 2 + 1e-12):
        raise ValueError(f"{name} must lie in [0, pi/2], got {theta}")
    return theta


def _rotation(theta: float, theta_one: Optional[float] = None) -> AttackModel:
    theta = _check_angle("theta", theta)
    params = {"theta": theta}
    if theta_one is None:
        theta_one = theta
    else:
        theta_one = _check_angle("theta_one", theta_one)
        params["theta_one"] = theta_one
    J = _on_be(2, _rotation_matrix(theta, theta_one))
    return AttackModel(_ancilla_zero(2), J, _on_be(2, np.eye(4)), kind="rotation", params=params)


def _random_unitary(seed: int, ancilla_dim: int) -> AttackModel:
    if not 1 <= ancilla_dim <= MAX_ANCILLA_DIM:
        raise ValueError(f"ancilla dimension must lie in [1, {MAX_ANCILLA_DIM}], got {ancilla_dim}")
    rng = np.random.default_rng(seed)
    d = 2 * ancilla_dim
    J = unitary_group.rvs(d, random_state=rng)
    K = unitary_group.rvs(d, random_state=rng)
    e = rng.normal(size=ancilla_dim) + 1j * rng.normal(size=ancilla_dim)
    e /= np.linalg.norm(e)
    return AttackModel(
        QuantumState((qm.ancilla(ancilla_dim),), e),
        _on_be(ancilla_dim, J),
        _on_be(ancilla_dim, K),
        kind="random-unitary",
        params={"seed": int(seed), "ancilla_dim": int(ancilla_dim)},
    )


def make_attack(kind: str, **params) -> AttackModel:
    """Build an attack from a named family.

    Families:
        ``identity``: no coupling (N = 1).
        ``intercept-resend`` (``basis="Z"|"X"``): controlled copy of B onto a
            qubit ancilla in the given basis, i.e. a unitary dilation of
            measure-and-resend; ``K`` is the identity.
        ``rotation`` (``theta``, optional ``theta_one``): partial flip of B by
            angle ``theta`` recorded in a qubit ancilla. With ``theta_one``
            the flip angle of ``|1>_B`` differs from that of ``|0>_B``, which
            moves the attack off the ``q = 0`` line.
        ``random-unitary`` (``seed``, ``ancilla_dim``): Haar-random ``J``, ``K``
            and a random ``|e>``.
    """
    kind = kind.lower().replace("_", "-")
    if kind == "identity":
        return _identity_attack()
    if kind == "intercept-resend":
        return _intercept_resend(params.get("basis", "Z"))
    if kind == "intercept-resend-x":
        return _intercept_resend("X")
    if kind == "intercept-resend-z":
        return _intercept_resend("Z")
    if kind == "rotation":
        return _rotation(params["theta"], params.get("theta_one"))
    if kind == "random-unitary":
        return _random_unitary(int(params.get("seed", 0)), int(params.get("ancilla_dim", 2)))
    raise ValueError(f"unknown attack family {kind!r}")


# --------------------------------------------------------------------------
# security quantities


def _input_states(attack: AttackModel) -> tuple[QuantumState, QuantumState]:
    e = attack.initial_ancilla
    return qm.tensor(qm.psi_plus(), e), qm.tensor(qm.psi_minus(), e)


def final_states(attack: AttackModel) -> FinalStates:
    """The four A-B-E states ``K (1 or Z)_B J |psi+-, e>``."""
    subs = attack.subsystems
    J = attack.J.embed(subs)
    K = attack.K.embed(subs)
    K_Z = K @ qm.pauli_z(B).embed(subs)
    plus, minus = _input_states(attack)
    jp, jm = qm.apply(J, plus), qm.apply(J, minus)
    return FinalStates(
        mu_plus=qm.apply(K, jp),
        mu_minus=qm.apply(K, jm),
        nu_plus=qm.apply(K_Z, jp),
        nu_minus=qm.apply(K_Z, jm),
    )


def _correlated_projector() -> Operator:
    return qm.projector(qm.basis_state((A, B), 0)) + qm.projector(qm.basis_state((A, B), 3))


def p_corr_exact(attack: AttackModel) -> float:
    """Correlated-check probability ``tr[J (rho_AB (x) |e><e|) J^dag (P00 + P11)]``.

    ``rho_AB`` is the equal mixture of ``|psi->`` and ``|psi+>``.  This is the
    reference definition; :func:`p_corr_overlap` is a cross-check.
    """
    plus, minus = _input_states(attack)
    rho = QuantumState(plus.subsystems, 0.5 * (plus.density_matrix() + minus.density_matrix()))
    rho = qm.apply(attack.J.embed(attack.subsystems), rho)
    return qm.born_probability(rho, _correlated_projector())


def p_corr_overlap(attack: AttackModel, states: Optional[FinalStates] = None) -> float:
    """``(1 + Re<mu+|nu->) / 2``."""
    states = states or final_states(attack)
    return 0.5 * (1.0 + qm.inner(states.mu_plus, states.nu_minus).real)


def q_overlap(attack: AttackModel, states: Optional[FinalStates] = None) -> float:
    """Real part of ``q = <mu+|nu+>``; a non-negligible imaginary part is logged."""
    states = states or final_states(attack)
    q = qm.inner(states.mu_plus, states.nu_plus)
    if abs(q.imag) > 1e-9:
        log.warning("q has imaginary part %.3g for %s", q.imag, attack.describe())
    return q.real


def _mixture(states: Sequence[QuantumState]) -> np.ndarray:
    return sum(s.density_matrix() for s in states) / len(states)


def _restrict(rho: np.ndarray, subs, system: str) -> np.ndarray:
    if system == "ABE":
        return rho
    if system == "E":
        return qm.partial_trace(QuantumState(subs, rho), "E").data
    raise ValueError(f"system must be 'ABE' or 'E', got {system!r}")


def _holevo(ensembles: Sequence[Sequence[QuantumState]], system: str) -> float:
    subs = ensembles[0][0].subsystems
    conditional = [_restrict(_mixture(members), subs, system) for members in ensembles]
    average = sum(conditional) / len(conditional)
    chi = qm.von_neumann_entropy(average) - sum(qm.von_neumann_entropy(r) for r in conditional) / len(conditional)
    return max(chi, 0.0)


def _conditional_ensembles(states: FinalStates, party: str) -> list[list[QuantumState]]:
    """Group the four final states by the bit of ``party`` via :data:`ENCODING`."""
    slot = {"alice": 0, "bob": 1}[party]
    groups: list[list[QuantumState]] = [[], []]
    for bits, name in ENCODING.items():
        groups[bits[slot]].append(getattr(states, name))
    return groups


def holevo_eve_bob(attack: AttackModel, states: Optional[FinalStates] = None, system: str = "ABE") -> float:
    """Holevo quantity (bits) of the ensemble indexed by Bob's key bit.

    With ``system="ABE"`` Eve is granted the whole final A-B-E state (an
    overestimate of her power); ``system="E"`` restricts her to the ancilla.
    """
    states = states or final_states(attack)
    return _holevo(_conditional_ensembles(states, "bob"), system)


def holevo_eve_alice(attack: AttackModel, states: Optional[FinalStates] = None, system: str = "ABE") -> float:
    """Holevo quantity (bits) of the ensemble indexed by Alice's key bit."""
    states = states or final_states(attack)
    return _holevo(_conditional_ensembles(states, "alice"), system)


@dataclass(frozen=True)
class AttackOutcome:
    attack: AttackModel = field(repr=False)
    states: FinalStates = field(repr=False)
    p_corr: float
    p_corr_overlap: float
    q: float
    q_imag: float
    chi_eve_bob: float
    chi_eve_alice: float

    def row(self) -> dict:
        return {
            "family": self.attack.kind,
            "params": json.dumps(self.attack.params, sort_keys=True),
            "p_corr": self.p_corr,
            "q": self.q,
            "chi_eve_bob": self.chi_eve_bob,
            "chi_eve_alice": self.chi_eve_alice,
        }


def evaluate_attack(attack: AttackModel, holevo: bool = True) -> AttackOutcome:
    states = final_states(attack)
    q = qm.inner(states.mu_plus, states.nu_plus)
    return AttackOutcome(
        attack=attack,
        states=states,
        p_corr=p_corr_exact(attack),
        p_corr_overlap=p_corr_overlap(attack, states),
        q=q.real,
        q_imag=q.imag,
        chi_eve_bob=holevo_eve_bob(attack, states) if holevo else math.nan,
        chi_eve_alice=holevo_eve_alice(attack, states) if holevo else math.nan,
    )


@dataclass(frozen=True)
class PcorrDiscrepancy:
    attack: dict
    p_corr_exact: float
    p_corr_overlap: float

    @property
    def gap(self) -> float:
        return abs(self.p_corr_exact - self.p_corr_overlap)


def check_p_corr_consistency(attacks: Iterable[AttackModel], tol: float = 1e-9) -> list[PcorrDiscrepancy]:
    """Every attack whose two ``P_corr`` evaluations differ by ``tol`` or more."""
    found = []
    for attack in attacks:
        exact = p_corr_exact(attack)
        overlap = p_corr_overlap(attack)
        if not abs(exact - overlap) < tol:
            found.append(PcorrDiscrepancy(attack.to_dict(), exact, overlap))
    return found


def rotation_sweep(thetas: Iterable[float], theta_one: Optional[float] = None) -> list[AttackOutcome]:
    """Evaluate the rotation family over ``thetas`` (kept in the given order)."""
    return [evaluate_attack(make_attack("rotation", theta=t, theta_one=theta_one)) for t in thetas]


SWEEP_COLUMNS = ("family", "params", "p_corr", "q", "chi_eve_bob", "chi_eve_alice")


def sweep_csv(outcomes: Iterable[AttackOutcome]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for o in outcomes:
        row = o.row()
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (row[c] for c in SWEEP_COLUMNS)])
    return buf.getvalue()
