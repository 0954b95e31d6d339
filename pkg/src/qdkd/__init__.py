"""Simulation and security analysis of quantum dense key distribution."""

from . import adversary, efficiency, protocol, quantum, security
from .adversary import AttackModel, make_attack
from .protocol import SessionConfig, run_session
from .security import binary_entropy, security_condition

__version__ = "0.1.0"

__all__ = [
    "adversary",
    "efficiency",
    "protocol",
    "quantum",
    "security",
    "AttackModel",
    "make_attack",
    "SessionConfig",
    "run_session",
    "binary_entropy",
    "security_condition",
]
