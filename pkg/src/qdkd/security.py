"""Classical security arithmetic: binary entropy, I(A:B) and the distillability test.

Alice and Bob can distil secret keys from a dense-coding run when

    H(Q) + H(P_corr) < 1,

with ``Q`` the key error rate and ``P_corr`` the rate of correlated outcomes in
the anticorrelation check.  Eve's information on either key is bounded by
``H(P_corr)`` and Alice/Bob share ``1 - H(Q)`` bits per key bit.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import bisect

__all__ = [
    "SecurityReport",
    "binary_entropy",
    "mutual_info_ab",
    "security_condition",
    "boundary_p_corr",
    "security_region",
    "security_region_csv",
]


def _check_unit(name: str, value: float, upper: float = 1.0) -> float:
    value = float(value)
    if not (0.0 <= value <= upper):
        raise ValueError(f"{name} must lie in [0, {upper}], got {value}")
    return value


def binary_entropy(p: float) -> float:
    """Shannon entropy of a Bernoulli(p) variable, in bits. ``H(0) = H(1) = 0``."""
    p = _check_unit("p", p)
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def mutual_info_ab(qber: float) -> float:
    """Alice-Bob mutual information ``1 - H(Q)`` of a binary symmetric channel."""
    qber = _check_unit("Q", qber, 0.5)
    return 1.0 - binary_entropy(qber)


@dataclass(frozen=True)
class SecurityReport:
    qber: float
    p_corr: float
    i_ab: float
    eve_bound: float
    margin: float
    secure: bool

    def to_dict(self) -> dict:
        return asdict(self)


def security_condition(qber: float, p_corr: float) -> SecurityReport:
    """Evaluate ``H(Q) + H(P_corr) < 1``.

    The boundary itself (margin exactly zero) counts as insecure.  A measured
    correlated rate above one half is treated as one half when bounding Eve:
    ``H`` falls again past 0.5, which would otherwise reward heavier
    disturbance.
    """
    qber = _check_unit("Q", qber, 0.5)
    p_corr = _check_unit("P_corr", p_corr)
    i_ab = mutual_info_ab(qber)
    eve = binary_entropy(min(p_corr, 0.5))
    margin = i_ab - eve
    return SecurityReport(
        qber=qber,
        p_corr=p_corr,
        i_ab=i_ab,
        eve_bound=eve,
        margin=margin,
        secure=margin > 0.0,
    )


def boundary_p_corr(qber: float, xtol: float = 1e-12) -> float:
    """The ``P_corr`` in [0, 0.5] at which ``H(Q) + H(P_corr) = 1``.

    Solved by bisection; ``H`` is increasing on [0, 0.5].
    """
    target = 1.0 - binary_entropy(_check_unit("Q", qber, 0.5))
    if target <= 0.0:
        return 0.0
    if target >= 1.0:
        return 0.5
    return float(bisect(lambda p: binary_entropy(p) - target, 0.0, 0.5, xtol=xtol))


def security_region(resolution: int = 101) -> np.ndarray:
    """Sampled boundary curve as an ``(resolution, 2)`` array of ``(Q, P_corr)``."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    qs = np.linspace(0.0, 0.5, resolution)
    return np.array([[q, boundary_p_corr(q)] for q in qs])


def security_region_csv(resolution: int = 101) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["qber", "p_corr_boundary"])
    for q, p in security_region(resolution):
        writer.writerow([repr(float(q)), repr(float(p))])
    return buf.getvalue()
