"""Practical efficiency of dense key distribution against BB84 under fibre loss.

Every protocol here has a practical efficiency of the form ``eta = E * P**k``
where ``E`` is the theoretical efficiency (secret bits per qubit plus public
bit) and ``k`` counts how many single-length photon traversals must survive.
Protocol-switch thresholds follow from equating two such monomials.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

__all__ = [
    "Protocol",
    "ProtocolSpec",
    "PROTOCOLS",
    "COMPARED",
    "ChannelModel",
    "transmission_prob",
    "eta",
    "switch_thresholds",
    "best_protocol",
    "crossover_distances",
    "storage_requirement",
    "efficiency_table",
    "efficiency_csv",
    "efficiency_summary",
]

FIBRE_LIGHT_SPEED_KM_S = 2.0e5


class Protocol(enum.Enum):
    QDKD = "QDKD"
    HCCP = "HCCP"
    BB84 = "BB84"
    BB84_OPTIMIZED = "BB84Optimized"
    HCLLP = "HCLLP"


@dataclass(frozen=True)
class ProtocolSpec:
    """Efficiency bookkeeping for one protocol.

    ``loss_exponent`` is ``None`` when no practical-efficiency expression is
    known (HCLLP); ``storage_factor`` is the decoherence-free storage time in
    units of ``L/c``.
    """

    name: Protocol
    secret_bits: float
    qubits: float
    public_bits: float
    loss_exponent: Optional[int]
    storage_factor: float

    def __post_init__(self):
        if not 0.0 < self.theoretical_e <= 1.0:
            raise ValueError(f"theoretical efficiency must lie in (0, 1], got {self.theoretical_e}")

    @property
    def theoretical_e(self) -> float:
        return self.secret_bits / (self.qubits + self.public_bits)


# Each QDKD round sends one qubit and announces one public bit for two key bits.
# BB84 keeps 1 of 4 bit slots (basis sifting + public basis bit); the optimised
# variant delays Bob's measurement until the basis is public and keeps 1 of 2.
PROTOCOLS: dict[Protocol, ProtocolSpec] = {
    Protocol.QDKD: ProtocolSpec(Protocol.QDKD, 2, 1, 1, loss_exponent=4, storage_factor=2),
    Protocol.HCCP: ProtocolSpec(Protocol.HCCP, 2, 1, 1, loss_exponent=4, storage_factor=2),
    Protocol.BB84: ProtocolSpec(Protocol.BB84, 1, 2, 2, loss_exponent=1, storage_factor=0),
    Protocol.BB84_OPTIMIZED: ProtocolSpec(Protocol.BB84_OPTIMIZED, 1, 1, 1, loss_exponent=2, storage_factor=1),
    Protocol.HCLLP: ProtocolSpec(Protocol.HCLLP, 2, 1, 1, loss_exponent=None, storage_factor=3),
}

# Ordered by preference on ties.
COMPARED = (Protocol.QDKD, Protocol.BB84_OPTIMIZED, Protocol.BB84)


@dataclass(frozen=True)
class ChannelModel:
    attenuation_db_per_km: float
    length_km: float
    light_speed_km_s: float = FIBRE_LIGHT_SPEED_KM_S

    def __post_init__(self):
        for name in ("attenuation_db_per_km", "length_km"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")
        if not (self.light_speed_km_s > 0):
            raise ValueError("light speed must be positive")


def transmission_prob(channel: ChannelModel) -> float:
    """Photon survival probability ``10**(-alpha L / 10)`` over one length ``L``."""
    return 10.0 ** (-channel.attenuation_db_per_km * channel.length_km / 10.0)


def _spec(protocol) -> ProtocolSpec:
    if isinstance(protocol, ProtocolSpec):
        return protocol
    try:
        return PROTOCOLS[Protocol(protocol)]
    except ValueError:
        raise ValueError(f"unknown protocol {protocol!r}") from None


def eta(protocol, p: float) -> float:
    """Practical efficiency ``E * P**k`` at transmission probability ``p``."""
    spec = _spec(protocol)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"P must lie in (0, 1], got {p}")
    if spec.loss_exponent is None:
        raise ValueError(f"no practical-efficiency expression for {spec.name.value}")
    return spec.theoretical_e * p**spec.loss_exponent


def _equal_eta_point(a: ProtocolSpec, b: ProtocolSpec) -> float:
    # E_a P^ka = E_b P^kb  =>  P = (E_b / E_a) ** (1 / (ka - kb))
    return (b.theoretical_e / a.theoretical_e) ** (1.0 / (a.loss_exponent - b.loss_exponent))


def switch_thresholds() -> tuple[float, float]:
    """Transmission probabilities where the best protocol changes.

    Returns ``(p_low, p_high)``: BB84 -> BB84Optimized at ``p_low`` and
    BB84Optimized -> QDKD at ``p_high``.
    """
    qdkd, opt, bb84 = (PROTOCOLS[p] for p in COMPARED)
    return _equal_eta_point(opt, bb84), _equal_eta_point(qdkd, opt)


def best_protocol(p: float) -> Protocol:
    if not 0.0 < p <= 1.0:
        raise ValueError(f"P must lie in (0, 1], got {p}")
    p_low, p_high = switch_thresholds()
    if p >= p_high:
        return Protocol.QDKD
    if p >= p_low:
        return Protocol.BB84_OPTIMIZED
    return Protocol.BB84


def crossover_distances(alpha: float) -> tuple[float, float]:
    """Link lengths (km) at which ``P(L)`` hits the two switch thresholds.

    Returns ``(L_qdkd_vs_optimized, L_optimized_vs_bb84)``; both are
    ``math.inf`` on a lossless fibre.
    """
    if not (math.isfinite(alpha) and alpha >= 0):
        raise ValueError(f"alpha must be finite and nonnegative, got {alpha}")
    if alpha == 0:
        return math.inf, math.inf
    p_low, p_high = switch_thresholds()
    return -10.0 * math.log10(p_high) / alpha, -10.0 * math.log10(p_low) / alpha


def storage_requirement(protocol, channel: ChannelModel) -> float:
    """Decoherence-free storage time in seconds, ``factor * L / c``."""
    return _spec(protocol).storage_factor * channel.length_km / channel.light_speed_km_s


def efficiency_table(alpha: float, lengths: Iterable[float]) -> list[dict]:
    """One row per link length with ``P``, each compared ``eta`` and the winner."""
    lengths = [float(x) for x in lengths]
    if not lengths:
        raise ValueError("length grid must be nonempty")
    rows = []
    for length in sorted(lengths):
        p = transmission_prob(ChannelModel(alpha, length))
        row = {"length_km": length, "p": p}
        for proto in COMPARED:
            row[f"eta_{proto.value}"] = eta(proto, p) if p > 0 else 0.0
        row["best"] = best_protocol(p).value if p > 0 else Protocol.BB84.value
        rows.append(row)
    return rows


def efficiency_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row.values()])
    return buf.getvalue()


def efficiency_summary(alpha: float) -> dict:
    p_low, p_high = switch_thresholds()
    l1, l2 = crossover_distances(alpha)
    return {
        "alpha": alpha,
        "thresholds_P": [p_low, p_high],
        "crossover_km": [None if math.isinf(l1) else l1, None if math.isinf(l2) else l2],
    }


def default_grid(alpha: float, points: int = 41) -> np.ndarray:
    """Length grid spanning twice the longer crossover distance (or 100 km)."""
    _, l2 = crossover_distances(alpha) if alpha > 0 else (0.0, 50.0)
    return np.linspace(0.0, 2.0 * l2, points)
