"""Channel strength matrices and the TIN GDoF arithmetic for K-user interference networks.

All channel state is carried as a square matrix of nonnegative strength
exponents: entry ``alpha[i][j]`` is the exponent of the link from
transmitter ``j`` to receiver ``i``, on the scale where the direct link of
a reference user at nominal power ``P`` has exponent 1.  Transmit powers
are expressed the same way, as per-user exponents ``r_i <= 0`` (power
``P**r_i``), with a dedicated ``SILENT`` sentinel for a switched-off
transmitter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Absolute tolerance for the per-user optimality comparison.  Strength
#: exponents come from logarithms of measured powers, so exact ties are
#: measure-zero but float-fragile; a tie within this band counts as a pass.
EPS_CONDITION = 1e-9


class _Silent:
    """Sentinel marking a transmitter with zero power (rate exponent -inf)."""

    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "SILENT"

    def __reduce__(self):
        return (_Silent, ())


SILENT = _Silent()


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Square matrix of channel strength exponents, receiver-major.

    ``alpha[i][j]`` is the strength exponent of the link from transmitter
    ``j`` to receiver ``i``.  Entries must be finite and nonnegative
    (negative exponents are clipped to zero upstream, see
    :func:`from_link_budget`).
    """

    alpha: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"alpha must be a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise ValueError("need at least one user")
        if not np.all(np.isfinite(a)):
            raise ValueError("alpha entries must be finite")
        if np.any(a < 0):
            raise ValueError("alpha entries must be nonnegative")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def K(self) -> int:
        return self.alpha.shape[0]

    def transpose(self) -> "ChannelMatrix":
        return ChannelMatrix(self.alpha.T)

    def restrict(self, users: Sequence[int]) -> "ChannelMatrix":
        """Sub-channel over the given users, keeping their order."""
        idx = list(users)
        return ChannelMatrix(self.alpha[np.ix_(idx, idx)])

    def to_dict(self, nominal_P: float | None = None) -> dict:
        d = {"K": self.K, "alpha": [[float(x) for x in row] for row in self.alpha]}
        if nominal_P is not None:
            d["nominal_P"] = float(nominal_P)
        return d


def channel_from_dict(data: dict) -> ChannelMatrix:
    """Build a :class:`ChannelMatrix` from its JSON dict form.

    Expected shape: ``{"K": <int>, "alpha": [[...]], "nominal_P": <optional>}``.
    """
    if not isinstance(data, dict):
        raise ValueError("channel document must be a JSON object")
    if "alpha" not in data:
        raise ValueError("channel document missing 'alpha'")
    alpha = data["alpha"]
    ch = ChannelMatrix(np.array(alpha, dtype=float))
    if "K" in data and int(data["K"]) != ch.K:
        raise ValueError(f"declared K={data['K']} does not match alpha shape {ch.K}")
    return ch


def load_channel(path: str) -> ChannelMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return channel_from_dict(data)


class PowerExponents:
    """Per-transmitter power exponents; each entry is a float <= 0 or SILENT."""

    __slots__ = ("values",)

    def __init__(self, values: Iterable):
        vals = []
        for k, v in enumerate(values):
            if v is SILENT:
                vals.append(SILENT)
                continue
            x = float(v)
            if not math.isfinite(x):
                raise ValueError(f"r[{k}] must be finite or SILENT, got {x}")
            if x > 0:
                raise ValueError(f"r[{k}] must be <= 0, got {x}")
            vals.append(x)
        self.values: tuple = tuple(vals)

    @classmethod
    def zeros(cls, K: int) -> "PowerExponents":
        return cls([0.0] * K)

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __eq__(self, other):
        return isinstance(other, PowerExponents) and self.values == other.values

    def __repr__(self) -> str:
        return f"PowerExponents({list(self.values)!r})"

    def is_silent(self, i: int) -> bool:
        return self.values[i] is SILENT

    @property
    def finite_mask(self) -> np.ndarray:
        return np.array([v is not SILENT for v in self.values], dtype=bool)

    @property
    def all_finite(self) -> bool:
        return bool(self.finite_mask.all())

    def finite_array(self) -> np.ndarray:
        """Finite entries with silent slots filled by NaN (callers must mask)."""
        return np.array(
            [np.nan if v is SILENT else v for v in self.values], dtype=float
        )

    def to_jsonable(self) -> list:
        return [None if v is SILENT else float(v) for v in self.values]


@dataclass(frozen=True)
class ConditionReport:
    """Per-user verdicts of the TIN optimality condition.

    User ``i`` passes when its direct exponent covers the sum of the
    strongest exponent it causes at any other receiver and the strongest
    exponent it suffers from any other transmitter.
    """

    per_user: tuple
    margins: tuple
    overall: bool

    def to_dict(self) -> dict:
        return {
            "per_user": [bool(b) for b in self.per_user],
            "margins": [float(m) for m in self.margins],
            "overall": bool(self.overall),
        }


def _check_r(alpha: ChannelMatrix, r: PowerExponents) -> None:
    if len(r) != alpha.K:
        raise ValueError(f"r has length {len(r)}, channel has K={alpha.K}")


def tin_gdof(alpha: ChannelMatrix, r: PowerExponents) -> np.ndarray:
    """GDoF achieved per user by treating interference as noise at power ``P**r``.

    d_i = max(0, a_ii + r_i - max(0, max_{j != i}(a_ij + r_j))); a silent
    user gets 0 and contributes no interference.  Output entries are >= 0.
    """
    _check_r(alpha, r)
    K = alpha.K
    a = alpha.alpha
    d = np.zeros(K)
    for i in range(K):
        if r.is_silent(i):
            continue
        interf = 0.0
        for j in range(K):
            if j == i or r.is_silent(j):
                continue
            interf = max(interf, a[i, j] + r[j])
        d[i] = max(0.0, a[i, i] + r[i] - interf)
    return d


def polyhedral_tin_gdof(alpha: ChannelMatrix, r: PowerExponents) -> np.ndarray:
    """Relaxed per-user GDoF without the clamp at zero; entries may be negative.

    Requires every power exponent finite: the relaxation has no notion of a
    silent user.  Componentwise never exceeds :func:`tin_gdof`.
    """
    _check_r(alpha, r)
    if not r.all_finite:
        raise ValueError("relaxed GDoF is undefined for SILENT entries")
    K = alpha.K
    a = alpha.alpha
    rv = r.finite_array()
    d = np.empty(K)
    for i in range(K):
        others = [a[i, j] + rv[j] for j in range(K) if j != i]
        interf = max(0.0, max(others)) if others else 0.0
        d[i] = a[i, i] + rv[i] - interf
    return d


def check_tin_condition(alpha: ChannelMatrix, eps: float = EPS_CONDITION) -> ConditionReport:
    """Decide, per user, whether TIN with power control is GDoF-optimal.

    The test is homogeneous of degree one in the exponents and invariant
    under swapping the roles of transmitters and receivers.
    """
    a = alpha.alpha
    K = alpha.K
    per_user = []
    margins = []
    for i in range(K):
        out_max = max((a[j, i] for j in range(K) if j != i), default=0.0)
        in_max = max((a[i, k] for k in range(K) if k != i), default=0.0)
        margin = float(a[i, i] - (out_max + in_max))
        margins.append(margin)
        per_user.append(margin >= -eps)
    return ConditionReport(tuple(per_user), tuple(margins), all(per_user))


def transpose_channel(alpha: ChannelMatrix) -> ChannelMatrix:
    """Swap the roles of transmitters and receivers (matrix transpose)."""
    return alpha.transpose()


def from_link_budget(
    snr: Sequence[float], inr: Sequence[Sequence[float]], nominal_P: float
) -> ChannelMatrix:
    """Convert linear-scale SNR/INR values into a strength-exponent matrix.

    Values below 1 are clipped up to 1 before taking logarithms, so the
    result is always nonnegative.  ``inr`` is a K-by-K matrix whose
    off-diagonal entry ``[k][i]`` is the INR of transmitter ``i`` at
    receiver ``k``; the diagonal is ignored.

    Args:
        snr: length-K positive linear SNRs (direct links).
        inr: K-by-K positive linear INRs (cross links; diagonal ignored).
        nominal_P: reference power, must exceed 1.

    Returns:
        ChannelMatrix with ``alpha = log(clipped value) / log(nominal_P)``.
    """
    if not (nominal_P > 1):
        raise ValueError(f"nominal_P must exceed 1, got {nominal_P}")
    s = np.array(snr, dtype=float)
    x = np.array(inr, dtype=float)
    K = s.shape[0]
    if s.ndim != 1:
        raise ValueError("snr must be a vector")
    if x.shape != (K, K):
        raise ValueError(f"inr must be {K}x{K}, got {x.shape}")
    off = ~np.eye(K, dtype=bool)
    if np.any(s <= 0) or np.any(x[off] <= 0):
        raise ValueError("SNR/INR values must be positive")
    logP = math.log(nominal_P)
    a = np.zeros((K, K))
    for k in range(K):
        for i in range(K):
            v = s[k] if k == i else x[k, i]
            a[k, i] = math.log(max(1.0, v)) / logP
    return ChannelMatrix(a)
