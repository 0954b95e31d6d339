"""Round-by-round simulation of dense key distribution between Alice and Bob.

One round:

1. Alice prepares the singlet, keeps A and applies ``1`` (bit 0) or ``Z``
   (bit 1) to B.
2. Eve, if present, applies ``J`` to B and her ancilla.
3. Bob routes B to his Z-basis detector (anticorrelation check, probability
   ``check_fraction``) or applies his own ``1``/``Z`` gate and returns it.
4. On the return trip Eve applies ``K``; the channel flips the encoded phase
   with probability ``channel_flip_prob``.
5. Alice projects A-B onto ``|psi->``, ``|psi+>`` or neither, and announces
   0 for ``psi-`` (same bits) and 1 for ``psi+`` (different bits).

From the public announcements each party rebuilds the other's key bit.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import quantum as qm
from .adversary import AttackModel
from .quantum import A, B, Operator, QuantumState

__all__ = [
    "SCHEMA_VERSION",
    "BobAction",
    "Outcome",
    "View",
    "SessionConfig",
    "RoundRecord",
    "KeyPair",
    "SessionReport",
    "Streams",
    "session_seed",
    "alice_encode",
    "bob_encode",
    "bob_route",
    "incomplete_bell_measure",
    "anticorrelation_check",
    "announce",
    "extract_keys",
    "scramble_key",
    "unscramble_key",
    "run_session",
    "records_csv",
]

SCHEMA_VERSION = 1


class BobAction(enum.Enum):
    MEASURE = "measure"
    ENCODE = "encode"


class Outcome(enum.Enum):
    PSI_MINUS = "psi-"
    PSI_PLUS = "psi+"
    OTHER = "other"
    Z_BASIS = "z-basis"


class View(enum.Enum):
    ALICE = "alice"
    BOB = "bob"


@dataclass(frozen=True)
class SessionConfig:
    """Parameters of one simulated session.

    ``check_noise`` flips B before Bob's check measurement only, emulating
    detector noise that raises the correlated rate without touching the key.
    ``disclosure_fraction`` sacrifices that share of the raw key to estimate
    the error rate the way real parties would; the exact rate obtained by
    comparing both views is reported regardless.
    """

    rounds: int
    check_fraction: float = 0.2
    channel_flip_prob: float = 0.0
    check_noise: float = 0.0
    disclosure_fraction: float = 0.0
    rng_seed: int = 0
    attack: Optional[AttackModel] = None

    def __post_init__(self):
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise ValueError(f"rounds must be a positive integer, got {self.rounds}")
        if not 0.0 <= self.check_fraction <= 1.0:
            raise ValueError(f"check_fraction must lie in [0, 1], got {self.check_fraction}")
        if not 0.0 <= self.channel_flip_prob <= 0.5:
            raise ValueError(f"channel_flip_prob must lie in [0, 0.5], got {self.channel_flip_prob}")
        if not 0.0 <= self.check_noise <= 1.0:
            raise ValueError(f"check_noise must lie in [0, 1], got {self.check_noise}")
        if not 0.0 <= self.disclosure_fraction < 1.0:
            raise ValueError(f"disclosure_fraction must lie in [0, 1), got {self.disclosure_fraction}")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "check_fraction": self.check_fraction,
            "channel_flip_prob": self.channel_flip_prob,
            "check_noise": self.check_noise,
            "disclosure_fraction": self.disclosure_fraction,
            "rng_seed": int(self.rng_seed),
            "attack": self.attack.describe() if self.attack is not None else None,
        }


@dataclass(frozen=True)
class RoundRecord:
    index: int
    alice_bit: int
    bob_action: BobAction
    outcome: Outcome
    bob_bit: Optional[int] = None
    a_out: Optional[int] = None
    b_out: Optional[int] = None
    announcement: Optional[int] = None

    def __post_init__(self):
        encode = self.bob_action is BobAction.ENCODE
        if encode != (self.bob_bit is not None):
            raise ValueError("bob_bit is set exactly on encode rounds")
        if (self.outcome is Outcome.Z_BASIS) != (not encode):
            raise ValueError("a Z-basis outcome occurs exactly on measure rounds")
        if (self.outcome is Outcome.Z_BASIS) != (self.a_out is not None and self.b_out is not None):
            raise ValueError("Z-basis outcomes carry both measured bits")
        conclusive = encode and self.outcome in (Outcome.PSI_MINUS, Outcome.PSI_PLUS)
        if conclusive != (self.announcement is not None):
            raise ValueError("announcement present iff an encode round ended in psi+ or psi-")
        if conclusive and self.announcement != announce(self.outcome):
            raise ValueError("announcement does not match the Bell outcome")

    @property
    def conclusive(self) -> bool:
        return self.announcement is not None

    @property
    def correlated(self) -> Optional[bool]:
        if self.outcome is not Outcome.Z_BASIS:
            return None
        return self.a_out == self.b_out


@dataclass(frozen=True)
class KeyPair:
    key_a: np.ndarray = field(repr=False)
    key_b: np.ndarray = field(repr=False)
    positions: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not len(self.key_a) == len(self.key_b) == len(self.positions):
            raise ValueError("key_a, key_b and positions must have equal lengths")

    def __len__(self) -> int:
        return len(self.key_a)

    def drop(self, mask: np.ndarray) -> "KeyPair":
        keep = ~mask
        return KeyPair(self.key_a[keep], self.key_b[keep], self.positions[keep])

    def to_dict(self, include_bits: bool = False) -> dict:
        out = {"length": len(self)}
        for name in ("key_a", "key_b"):
            bits = _bitstring(getattr(self, name))
            out[f"{name}_sha256"] = hashlib.sha256(bits.encode()).hexdigest()
            if include_bits:
                out[name] = bits
        return out


def _bitstring(bits: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in bits)


@dataclass(frozen=True)
class SessionReport:
    config: SessionConfig
    alice_view: KeyPair
    bob_view: KeyPair
    p_corr_estimate: float
    p_corr_check_count: int
    correlated_count: int
    qber_estimate: float
    qber_sampled: Optional[float]
    sampled_count: int
    encode_rounds: int
    conclusive_rounds: int
    discarded_other: int
    records: tuple[RoundRecord, ...] = field(repr=False, default=())

    def to_dict(self, include_keys: bool = False) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "p_corr_estimate": self.p_corr_estimate,
            "p_corr_check_count": self.p_corr_check_count,
            "correlated_count": self.correlated_count,
            "qber_estimate": self.qber_estimate,
            "qber_sampled": self.qber_sampled,
            "sampled_count": self.sampled_count,
            "encode_rounds": self.encode_rounds,
            "conclusive_rounds": self.conclusive_rounds,
            "discarded_other": self.discarded_other,
            "key_pair_alice_view": self.alice_view.to_dict(include_keys),
            "key_pair_bob_view": self.bob_view.to_dict(include_keys),
        }

    def to_json(self, include_keys: bool = False) -> str:
        return json.dumps(self.to_dict(include_keys), indent=2, sort_keys=True)


# --------------------------------------------------------------------------
# random streams


@dataclass
class Streams:
    """Independent generators for protocol choices, measurements and noise."""

    protocol: np.random.Generator
    measurement: np.random.Generator
    noise: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "Streams":
        children = np.random.SeedSequence(int(seed)).spawn(3)
        return cls(*(np.random.default_rng(c) for c in children))


def session_seed(master_seed: int, index: int) -> int:
    """Seed of the ``index``-th session in a batch driven by ``master_seed``."""
    return (int(master_seed) ^ int(index)) & (2**64 - 1)


# --------------------------------------------------------------------------
# per-round operations


def _check_ab(state: QuantumState) -> None:
    if state.names[:2] != ("A", "B"):
        raise ValueError(f"state must contain subsystems A and B, got {state.names}")


def _gate(bit: int) -> Operator:
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    return qm.identity(B) if bit == 0 else qm.pauli_z(B)


def alice_encode(bit: int, pair: QuantumState) -> QuantumState:
    """Apply ``1_B`` for bit 0 or ``Z_B`` for bit 1."""
    _check_ab(pair)
    return qm.apply(_gate(bit), pair)


def bob_encode(bit: int, state: QuantumState) -> QuantumState:
    """Bob's gate choice; the same table as Alice's."""
    _check_ab(state)
    return qm.apply(_gate(bit), state)


def bob_route(rng: np.random.Generator, check_fraction: float) -> BobAction:
    """Send B to the check detector with probability ``check_fraction``."""
    return BobAction.MEASURE if rng.random() < check_fraction else BobAction.ENCODE


_BELL = (Outcome.PSI_MINUS, Outcome.PSI_PLUS, Outcome.OTHER)


def _bell_measurement() -> list[Operator]:
    pm = qm.projector(qm.psi_minus())
    pp = qm.projector(qm.psi_plus())
    rest = Operator((A, B), np.eye(4) - pm.matrix - pp.matrix)
    return [pm, pp, rest]


def _z_measurement() -> list[Operator]:
    return [qm.projector(qm.basis_state((A, B), k)) for k in range(4)]


def incomplete_bell_measure(
    state: QuantumState,
    rng: np.random.Generator,
    _projectors: Optional[Sequence[Operator]] = None,
) -> tuple[Outcome, QuantumState]:
    """Project A-B on ``psi-``, ``psi+`` or their complement (``OTHER``).

    Any ancilla is carried through the projection untouched.
    """
    _check_ab(state)
    k, post = qm.sample_projective(state, _projectors or _bell_measurement(), rng)
    return _BELL[k], post


def anticorrelation_check(
    state: QuantumState,
    rng: np.random.Generator,
    _projectors: Optional[Sequence[Operator]] = None,
) -> tuple[int, int, bool]:
    """Joint Z-basis measurement of A and B; returns ``(a_out, b_out, correlated)``."""
    _check_ab(state)
    k, _ = qm.sample_projective(state, _projectors or _z_measurement(), rng)
    a_out, b_out = divmod(k, 2)
    return a_out, b_out, a_out == b_out


def announce(outcome: Outcome) -> int:
    """Public bit: 0 for ``psi-`` (equal key bits), 1 for ``psi+`` (different)."""
    if outcome is Outcome.PSI_MINUS:
        return 0
    if outcome is Outcome.PSI_PLUS:
        return 1
    raise ValueError(f"nothing to announce for outcome {outcome.value}")


def extract_keys(records: Iterable[RoundRecord], view: View) -> KeyPair:
    """Rebuild both keys from one party's private bits and the public bits.

    Alice knows ``a`` and infers ``b = s ^ a``; Bob knows ``b`` and infers
    ``a = s ^ b``.
    """
    view = View(view)
    key_a, key_b, pos = [], [], []
    for r in records:
        if r.bob_action is not BobAction.ENCODE or not r.conclusive:
            continue
        if r.outcome not in (Outcome.PSI_MINUS, Outcome.PSI_PLUS):
            raise ValueError(f"round {r.index}: announcement without a Bell outcome")
        if view is View.ALICE:
            a = r.alice_bit
            b = r.announcement ^ a
        else:
            b = r.bob_bit
            a = r.announcement ^ b
        key_a.append(a)
        key_b.append(b)
        pos.append(r.index)
    return KeyPair(
        np.array(key_a, dtype=np.uint8),
        np.array(key_b, dtype=np.uint8),
        np.array(pos, dtype=np.int64),
    )


def _permutation(n: int, secret_seed: int) -> np.ndarray:
    # Fisher-Yates, driven by a generator keyed on the shared secret
    rng = np.random.Generator(np.random.PCG64(int(secret_seed)))
    perm = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def scramble_key(key_b, secret_seed: int) -> np.ndarray:
    """Secretly permute bit positions of a key; undo with :func:`unscramble_key`."""
    key = np.asarray(key_b, dtype=np.uint8)
    if key.size == 0:
        raise ValueError("cannot scramble an empty key")
    return key[_permutation(key.size, secret_seed)]


def unscramble_key(scrambled, secret_seed: int) -> np.ndarray:
    key = np.asarray(scrambled, dtype=np.uint8)
    if key.size == 0:
        raise ValueError("cannot unscramble an empty key")
    out = np.empty_like(key)
    out[_permutation(key.size, secret_seed)] = key
    return out


# --------------------------------------------------------------------------
# session loop


def run_session(config: SessionConfig) -> SessionReport:
    """Run ``config.rounds`` protocol rounds and summarise them."""
    streams = Streams.from_seed(config.rng_seed)
    attack = config.attack
    if attack is None:
        subs = (A, B)
        initial = qm.psi_minus()
        J = K = None
    else:
        subs = attack.subsystems
        initial = qm.tensor(qm.psi_minus(), attack.initial_ancilla)
        J = attack.J.embed(subs)
        K = attack.K.embed(subs)

    gates = [qm.identity(B).embed(subs), qm.pauli_z(B).embed(subs)]
    flip_x = qm.pauli_x(B).embed(subs)
    bell = [p.embed(subs) for p in _bell_measurement()]
    zmeas = [p.embed(subs) for p in _z_measurement()]

    records = []
    for i in range(config.rounds):
        a = int(streams.protocol.integers(2))
        state = qm.apply(gates[a], initial)
        if J is not None:
            state = qm.apply(J, state)
        if bob_route(streams.protocol, config.check_fraction) is BobAction.MEASURE:
            if config.check_noise and streams.noise.random() < config.check_noise:
                state = qm.apply(flip_x, state)
            a_out, b_out, _ = anticorrelation_check(state, streams.measurement, zmeas)
            records.append(RoundRecord(i, a, BobAction.MEASURE, Outcome.Z_BASIS, a_out=a_out, b_out=b_out))
            continue
        b = int(streams.protocol.integers(2))
        state = qm.apply(gates[b], state)
        if K is not None:
            state = qm.apply(K, state)
        # the key bit lives in the relative phase, so channel errors are phase flips of B
        if config.channel_flip_prob and streams.noise.random() < config.channel_flip_prob:
            state = qm.apply(gates[1], state)
        outcome, _ = incomplete_bell_measure(state, streams.measurement, bell)
        s = announce(outcome) if outcome is not Outcome.OTHER else None
        records.append(RoundRecord(i, a, BobAction.ENCODE, outcome, bob_bit=b, announcement=s))

    return summarize(config, records, streams.protocol)


def summarize(config: SessionConfig, records: Sequence[RoundRecord], rng: np.random.Generator) -> SessionReport:
    """Estimate ``P_corr`` and ``Q`` and assemble both parties' keys."""
    checks = [r for r in records if r.outcome is Outcome.Z_BASIS]
    n_corr = sum(1 for r in checks if r.correlated)
    encode = [r for r in records if r.bob_action is BobAction.ENCODE]
    other = sum(1 for r in encode if r.outcome is Outcome.OTHER)

    alice = extract_keys(records, View.ALICE)
    bob = extract_keys(records, View.BOB)
    n = len(alice)
    qber = float(np.count_nonzero(alice.key_a != bob.key_a)) / n if n else 0.0

    qber_sampled = None
    sampled = 0
    if config.disclosure_fraction > 0 and n:
        mask = rng.random(n) < config.disclosure_fraction
        sampled = int(mask.sum())
        if sampled:
            qber_sampled = float(np.count_nonzero(alice.key_a[mask] != bob.key_a[mask])) / sampled
        alice, bob = alice.drop(mask), bob.drop(mask)

    return SessionReport(
        config=config,
        alice_view=alice,
        bob_view=bob,
        p_corr_estimate=n_corr / len(checks) if checks else 0.0,
        p_corr_check_count=len(checks),
        correlated_count=n_corr,
        qber_estimate=qber,
        qber_sampled=qber_sampled,
        sampled_count=sampled,
        encode_rounds=len(encode),
        conclusive_rounds=len(encode) - other,
        discarded_other=other,
        records=tuple(records),
    )


RECORD_COLUMNS = ("index", "alice_bit", "bob_action", "bob_bit", "outcome", "a_out", "b_out", "announcement")


def records_csv(records: Iterable[RoundRecord]) -> str:
    """Audit trail, one row per round; empty cells for fields a round lacks."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.index,
                r.alice_bit,
                r.bob_action.value,
                "" if r.bob_bit is None else r.bob_bit,
                r.outcome.value,
                "" if r.a_out is None else r.a_out,
                "" if r.b_out is None else r.b_out,
                "" if r.announcement is None else r.announcement,
            ]
        )
    return buf.getvalue()
