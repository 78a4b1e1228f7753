"""How many T-digits an S-cylinder determines, and the statistics of that count.

The core loop reads the T-digit of the left endpoint from the right and of the
right endpoint from the left; while they agree the digit is determined and
both endpoints are pushed through the branch.
"""

from __future__ import annotations

import copy
import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .expansions import INFINITE_DIGIT, FibredMap, RadixMap, format_digits
from .numeric import (
    DEFAULT_POLICY,
    Order,
    PrecisionExhausted,
    PrecisionPolicy,
    Side,
    compare,
    golden_power,
    is_exact,
    log_estimate,
)


class Status(enum.Enum):
    SEPARATED = "separated"
    CAP_REACHED = "cap_reached"
    PRECISION_EXHAUSTED = "precision_exhausted"


class HitType(enum.Enum):
    TYPE1 = "TYPE1"
    TYPE2 = "TYPE2"


@dataclass(frozen=True)
class AgreementResult:
    """m T-digits shared by every point of an interval.

    Unless ``status`` is SEPARATED, ``m`` is only a lower bound.
    """

    m: int
    digits: tuple
    status: Status

    @property
    def exact(self) -> bool:
        return self.status is Status.SEPARATED


def default_cap(policy: PrecisionPolicy) -> int:
    return 8 * policy.initial_bits + 64


def policy_for(mapS: FibredMap, n: int, width=None) -> PrecisionPolicy:
    """Working precision for an S-cylinder of rank n: its scale in bits plus 128.

    Exact cylinder widths are measured directly; otherwise the map's
    ``bits_per_digit`` bound is used.
    """
    bits = None
    if width is not None and is_exact(width) and width > 0:
        bits = math.ceil(-log_estimate(width) / math.log(2))
    elif mapS.bits_per_digit is not None:
        bits = math.ceil(n * mapS.bits_per_digit)
    if bits is None:
        return DEFAULT_POLICY
    return PrecisionPolicy.for_bits(max(bits, 0) + 128)


class _Agreement:
    """Running state: determined T-digits and T^m images of the interval ends."""

    def __init__(self, mapT: FibredMap, policy: PrecisionPolicy, cap: int):
        self.map = mapT
        self.policy = policy
        self.cap = cap
        self.prefix = mapT.new_prefix()
        self.lo = self.hi = None
        self.status = Status.SEPARATED

    @property
    def m(self) -> int:
        return len(self.prefix)

    def copy(self) -> "_Agreement":
        new = copy.copy(self)
        new.prefix = self.prefix.copy()
        return new

    def reset_interval(self, left, right, changed=(True, True)):
        """Install a new (smaller) interval, re-imaging the endpoints that changed."""
        if not self.prefix.digits:
            self.lo, self.hi = left, right
            return
        flip = self.prefix.parity < 0
        # which image slot each endpoint feeds
        if changed[0]:
            img = self.prefix.image(left, self.policy)
            if flip:
                self.hi = img
            else:
                self.lo = img
        if changed[1]:
            img = self.prefix.image(right, self.policy)
            if flip:
                self.lo = img
            else:
                self.hi = img

    def extend(self) -> Status:
        T, policy = self.map, self.policy
        try:
            while self.m < self.cap:
                dl = T.digit_of(self.lo, Side.FROM_RIGHT, policy)
                dr = T.digit_of(self.hi, Side.FROM_LEFT, policy)
                if dl is None or dl == INFINITE_DIGIT or dl != dr:
                    self.status = Status.SEPARATED
                    return self.status
                a = T.apply(self.lo, dl, policy)
                b = T.apply(self.hi, dl, policy)
                if T.orientation(dl) < 0:
                    a, b = b, a
                self.lo, self.hi = a, b
                self.prefix.push(dl)
            self.status = Status.CAP_REACHED
        except PrecisionExhausted:
            self.status = Status.PRECISION_EXHAUSTED
        return self.status

    def result(self) -> AgreementResult:
        return AgreementResult(self.m, tuple(self.prefix.digits), self.status)


def determined_digits(interval, mapT: FibredMap, cap: int | None = None,
                      policy: PrecisionPolicy = DEFAULT_POLICY) -> AgreementResult:
    """The T-digits common to all points of the interval (left, right).

    Endpoints lying exactly on a branch boundary do not block a digit.
    """
    left, right = interval
    if compare(left, right, policy) is not Order.LESS:
        raise ValueError("interval must have left < right")
    state = _Agreement(mapT, policy, default_cap(policy) if cap is None else cap)
    state.reset_interval(left, right)
    state.extend()
    return state.result()


# ---------------------------------------------------------------------------
# ell(n) and the per-n series
# ---------------------------------------------------------------------------


def ell(n: int, g: int, h: int) -> int:
    """Largest l with h**l <= g**n (exact integers)."""
    if g < 2 or h < 2 or n < 1:
        raise ValueError("need g, h >= 2 and n >= 1")
    target = g ** n
    l = int(n * math.log(g) / math.log(h))
    while h ** l > target:
        l -= 1
    while h ** (l + 1) <= target:
        l += 1
    return l


def classify_hit_type(interval, h: int, m: int) -> HitType | None:
    """TYPE1/TYPE2 by the number of rank-(m+1) h-adic boundaries inside the open interval.

    Returns None when no boundary is inside (the interval is not blocked at m).
    """
    left, right = interval
    if not (is_exact(left) and is_exact(right)):
        raise TypeError("hit classification needs exact endpoints")
    H = h ** (m + 1)
    count = _ceil(right * H) - _floor(left * H) - 1
    if count <= 0:
        return None
    return HitType.TYPE1 if count == 1 else HitType.TYPE2


def _floor(x) -> int:
    return math.floor(x)


def _ceil(x) -> int:
    return -math.floor(-x)


@dataclass
class MSeries:
    """m(n) for n = 1..N with per-n status, and radix annotations when S and T are radix maps."""

    m: list[int]
    status: list[Status]
    digits: tuple = ()
    ell: list[int] | None = None
    hit_types: list[HitType | None] | None = None
    g: int | None = None
    h: int | None = None

    @property
    def n(self) -> int:
        return len(self.m)

    @property
    def final(self) -> int:
        return self.m[-1] if self.m else 0

    @property
    def final_status(self) -> Status:
        return self.status[-1] if self.status else Status.SEPARATED

    def jumps(self) -> list[bool]:
        prev = 0
        out = []
        for v in self.m:
            out.append(v > prev)
            prev = v
        return out

    def rows(self) -> list[dict]:
        out = []
        for i, (v, j) in enumerate(zip(self.m, self.jumps())):
            out.append({
                "n": i + 1,
                "m": v,
                "ell": self.ell[i] if self.ell else "",
                "jump": int(j),
                "type": (self.hit_types[i].value if self.hit_types and self.hit_types[i] else ""),
            })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["n", "m", "ell", "jump", "type"], lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "m": list(self.m),
            "status": [s.value for s in self.status],
            "ell": self.ell,
            "hit_types": [t.value if t else None for t in self.hit_types] if self.hit_types else None,
            "g": self.g,
            "h": self.h,
            "digits": format_digits(self.digits),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _radix(fmap) -> int | None:
    return fmap.g if isinstance(fmap, RadixMap) else None


def m_series(mapS: FibredMap, seed_digits: Sequence, mapT: FibredMap,
             policy: PrecisionPolicy | None = None, cap: int | None = None) -> MSeries:
    """m(n) for every prefix of ``seed_digits``, computed incrementally.

    The T-prefix and endpoint images carry over from n to n+1; an endpoint
    that moved is re-imaged through the determined prefix.
    """
    seed_digits = tuple(seed_digits)
    N = len(seed_digits)
    if policy is None:
        policy = policy_for(mapS, N, mapS.cylinder(seed_digits).width() if N else None)
    state = _Agreement(mapT, policy, default_cap(policy) if cap is None else cap)
    g, h = _radix(mapS), _radix(mapT)
    ms, statuses, hits = [], [], []
    prev = None
    for cyl in mapS.cylinder_series(seed_digits, policy):
        if prev is None:
            state.reset_interval(cyl.left, cyl.right)
        else:
            changed = (not _same(cyl.left, prev.left), not _same(cyl.right, prev.right))
            state.reset_interval(cyl.left, cyl.right, changed)
        prev = cyl
        if state.status is not Status.PRECISION_EXHAUSTED:
            state.extend()
        ms.append(state.m)
        statuses.append(state.status)
        if h is not None and is_exact(cyl.left):
            hits.append(classify_hit_type((cyl.left, cyl.right), h, state.m))
    series = MSeries(ms, statuses, tuple(state.prefix.digits), g=g, h=h)
    if g is not None and h is not None:
        series.ell = [ell(n, g, h) for n in range(1, N + 1)]
    if h is not None and len(hits) == N:
        series.hit_types = hits
    return series


def _same(a, b) -> bool:
    if a is b:
        return True
    return is_exact(a) and is_exact(b) and a == b


# ---------------------------------------------------------------------------
# Jumps and hanging
# ---------------------------------------------------------------------------


@dataclass
class JumpStats:
    """Jump times n_k (with n_0 = 0), hanging times v_k = n_k - n_{k-1}, and hit types."""

    times: list[int]
    hangs: list[int]
    types: list[HitType | None] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.times)


def jump_times(series: MSeries | Sequence[int]) -> JumpStats:
    m = series.m if isinstance(series, MSeries) else list(series)
    hit = series.hit_types if isinstance(series, MSeries) else None
    times, hangs, types = [], [], []
    prev_m, prev_t = 0, 0
    for n, v in enumerate(m, 1):
        if v > prev_m:
            times.append(n)
            hangs.append(n - prev_t)
            # the blocking situation the jump resolved is the one at n - 1
            types.append(hit[n - 2] if hit and n >= 2 else None)
            prev_t = n
        prev_m = v
    return JumpStats(times, hangs, types)


@dataclass(frozen=True)
class FrequencyEstimate:
    value: float
    stderr: float
    count: int
    steps: int


def hang_frequency(trials: Iterable[MSeries | Sequence[int]], g: int | None = None) -> FrequencyEstimate:
    """Pooled fraction of steps n -> n+1 (n >= 1) with m(n+1) = m(n), with binomial SE.

    ``g`` is accepted for symmetry with the theoretical value 1/g; it is not
    used in the estimate.
    """
    hangs = steps = 0
    for t in trials:
        m = t.m if isinstance(t, MSeries) else list(t)
        for a, b in zip(m, m[1:]):
            steps += 1
            hangs += a == b
    if steps == 0:
        raise ValueError("no steps to pool")
    p = hangs / steps
    return FrequencyEstimate(p, math.sqrt(p * (1 - p) / steps), hangs, steps)


def jump_bound_violations(series: MSeries) -> list[int]:
    """Jump times where l(n) - 1 - log g/log h <= m(n) <= l(n) fails (exact integers)."""
    if series.g is None or series.h is None:
        raise ValueError("jump bound needs radix S and T")
    g, h = series.g, series.h
    bad = []
    for n in jump_times(series).times:
        l, m = series.ell[n - 1], series.m[n - 1]
        k = l - 1 - m
        # m >= l - 1 - log g/log h  <=>  h**k <= g when k >= 0
        if m > l or (k > 0 and h ** k > g):
            bad.append(n)
    return bad


def sandwich_violations(series: MSeries) -> list[int]:
    """n with m(n) > l(n)."""
    if series.ell is None:
        raise ValueError("sandwich needs radix S and T")
    return [i + 1 for i, (m, l) in enumerate(zip(series.m, series.ell)) if m > l]


def golden_jump_violations(series: MSeries, g: int) -> list[int]:
    """Jump times where gamma**(m+2) >= g**(n-1) fails, gamma the golden mean (exact)."""
    bad = []
    for n in jump_times(series).times:
        m = series.m[n - 1]
        if golden_power(m + 2) < g ** (n - 1):
            bad.append(n)
    return bad
