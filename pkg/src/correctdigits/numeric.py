"""Exact and adaptive-precision real arithmetic.

Three kinds of real numbers circulate through the package:

* ``int`` / :class:`fractions.Fraction` for rationals,
* :class:`QuadraticElement` for elements ``(p + q*sqrt(5)) / d`` of Q(sqrt 5),
* :class:`RefinableReal` for everything else: a lazily evaluated expression
  whose value is available as a :class:`Ball` at any requested precision.

Order and floor decisions go through :func:`compare` and :func:`floor`, which
are exact on exact kinds and escalate precision on refinable ones until the
answer is certain, raising :class:`PrecisionExhausted` otherwise.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Callable, Iterator, Sequence, Union


class PrecisionExhausted(ArithmeticError):
    """Balls still overlap after the last allowed precision escalation."""


class Order(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Side(enum.Enum):
    """Which one-sided limit a digit or floor decision refers to.

    ``FROM_RIGHT`` means "the value at x + eps", ``FROM_LEFT`` "at x - eps",
    for an infinitesimal eps > 0.  ``AT`` means the value x itself.
    """

    FROM_RIGHT = "from_right"
    FROM_LEFT = "from_left"
    AT = "at"


@dataclass(frozen=True)
class PrecisionPolicy:
    initial_bits: int = 256
    escalation_factor: int = 2
    max_escalations: int = 4

    def __post_init__(self):
        if self.initial_bits < 64:
            raise ValueError("initial_bits must be at least 64")
        if self.escalation_factor < 2:
            raise ValueError("escalation_factor must be at least 2")
        if self.max_escalations < 0:
            raise ValueError("max_escalations must be nonnegative")

    def schedule(self) -> Iterator[int]:
        bits = self.initial_bits
        for _ in range(self.max_escalations + 1):
            yield bits
            bits *= self.escalation_factor

    @classmethod
    def for_cylinder(cls, n: int, g: int, **kwargs) -> "PrecisionPolicy":
        """Policy sized for a seed cylinder of width ``g**-n``."""
        return cls(initial_bits=ceil_log2_power(g, n) + 128, **kwargs)

    @classmethod
    def for_bits(cls, bits: int, **kwargs) -> "PrecisionPolicy":
        return cls(initial_bits=max(64, int(math.ceil(bits)) + 128), **kwargs)


DEFAULT_POLICY = PrecisionPolicy()


def ceil_log2_power(g: int, n: int) -> int:
    """Exact ``ceil(n * log2(g))``."""
    if n <= 0:
        return 0
    return (g**n - 1).bit_length()


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _floor_div(a: int, b: int) -> int:
    if b < 0:
        a, b = -a, -b
    return a // b


def _ceil_isqrt(n: int) -> int:
    if n <= 0:
        return 0
    r = math.isqrt(n)
    return r if r * r == n else r + 1


# ---------------------------------------------------------------------------
# Q(sqrt 5)
# ---------------------------------------------------------------------------


@total_ordering
class QuadraticElement:
    """The number ``(p + q*sqrt(5)) / d`` with ``d > 0`` and gcd(p, q, d) = 1."""

    __slots__ = ("p", "q", "d")

    def __init__(self, p: int, q: int = 0, d: int = 1):
        if d == 0:
            raise ZeroDivisionError("QuadraticElement with zero denominator")
        if d < 0:
            p, q, d = -p, -q, -d
        g = math.gcd(math.gcd(p, q), d)
        if g > 1:
            p, q, d = p // g, q // g, d // g
        self.p = p
        self.q = q
        self.d = d

    @classmethod
    def coerce(cls, x) -> "QuadraticElement":
        if isinstance(x, QuadraticElement):
            return x
        if isinstance(x, int):
            return cls(x, 0, 1)
        if isinstance(x, Fraction):
            return cls(x.numerator, 0, x.denominator)
        raise TypeError(f"cannot convert {type(x).__name__} to QuadraticElement")

    @classmethod
    def from_golden(cls, a, b) -> "QuadraticElement":
        """``a + b*beta`` with beta the golden mean; a, b rational."""
        return cls.coerce(Fraction(a)) + cls.coerce(Fraction(b)) * GOLDEN

    def _other(self, other):
        if isinstance(other, QuadraticElement):
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticElement.coerce(other)
        return None

    # arithmetic ------------------------------------------------------------
    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return QuadraticElement(self.p * o.d + o.p * self.d, self.q * o.d + o.q * self.d, self.d * o.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticElement(-self.p, -self.q, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return QuadraticElement(self.p * o.d - o.p * self.d, self.q * o.d - o.q * self.d, self.d * o.d)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return QuadraticElement(
            self.p * o.p + 5 * self.q * o.q,
            self.p * o.q + self.q * o.p,
            self.d * o.d,
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "QuadraticElement":
        norm = self.p * self.p - 5 * self.q * self.q
        if norm == 0:
            raise ZeroDivisionError("reciprocal of zero")
        return QuadraticElement(self.d * self.p, -self.d * self.q, norm)

    def __truediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o.p == 1 and o.q == 0 and o.d == 1:
            return self.reciprocal()
        return o * self.reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.reciprocal() ** (-n)
        result = QuadraticElement(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # order -----------------------------------------------------------------
    def sign(self) -> int:
        """Sign of p + q*sqrt(5), decided with integer arithmetic only."""
        p, q = self.p, self.q
        sp = (p > 0) - (p < 0)
        sq = (q > 0) - (q < 0)
        if sq == 0:
            return sp
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: compare p^2 with 5 q^2 (never equal for q != 0)
        return sp if p * p > 5 * q * q else sq

    def _cmp(self, other) -> int:
        o = self._other(other)
        if o is None:
            return NotImplemented
        return (self - o).sign()

    def __eq__(self, other):
        if isinstance(other, QuadraticElement):
            return self.p == other.p and self.q == other.q and self.d == other.d
        if isinstance(other, (int, Fraction)):
            return self.q == 0 and Fraction(self.p, self.d) == other
        return NotImplemented

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __hash__(self):
        if self.q == 0:
            return hash(Fraction(self.p, self.d))
        return hash((self.p, self.q, self.d))

    def __bool__(self):
        return self.p != 0 or self.q != 0

    # misc ------------------------------------------------------------------
    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def conjugate(self) -> "QuadraticElement":
        return QuadraticElement(self.p, -self.q, self.d)

    def norm(self) -> Fraction:
        return Fraction(self.p * self.p - 5 * self.q * self.q, self.d * self.d)

    def floor(self) -> int:
        q5 = _floor_sqrt5_times(self.q)
        return (self.p + q5) // self.d

    def __floor__(self):
        return self.floor()

    def bounds(self, bits: int) -> tuple[int, int]:
        """Integers lo, hi with lo <= self * 2**bits <= hi."""
        scaled = 5 * self.q * self.q << (2 * bits)
        r = math.isqrt(scaled)
        r_up = r if r * r == scaled else r + 1
        if self.q >= 0:
            s_lo, s_hi = r, r_up
        else:
            s_lo, s_hi = -r_up, -r
        num_lo = (self.p << bits) + s_lo
        num_hi = (self.p << bits) + s_hi
        return num_lo // self.d, _ceil_div(num_hi, self.d)

    def __float__(self):
        lo, hi = self.bounds(64)
        return float(Fraction(lo + hi, 2 << 64))

    def log(self) -> float:
        """Natural log of a positive element, safe for huge magnitudes."""
        if self.sign() <= 0:
            raise ValueError("log of a nonpositive number")
        bits = 64
        while True:
            lo, hi = self.bounds(bits)
            if lo > 1 << 32:
                return math.log(lo) - bits * math.log(2)
            bits *= 2

    def __repr__(self):
        return f"QuadraticElement({self.p}, {self.q}, {self.d})"

    def __str__(self):
        if self.q == 0:
            return str(Fraction(self.p, self.d))
        sign = "+" if self.q >= 0 else "-"
        body = f"{self.p}{sign}{abs(self.q)}*sqrt5"
        return f"({body})" if self.d == 1 else f"({body})/{self.d}"


def _floor_sqrt5_times(q: int) -> int:
    """floor(q * sqrt(5))."""
    r = math.isqrt(5 * q * q)
    if q >= 0:
        return r
    # q*sqrt5 is irrational for q != 0, so floor(-r') = -r - 1
    return -r - 1


GOLDEN = QuadraticElement(1, 1, 2)


_FIB = [0, 1]


def fibonacci(n: int) -> int:
    while len(_FIB) <= n:
        _FIB.append(_FIB[-1] + _FIB[-2])
    return _FIB[n]


@lru_cache(maxsize=4096)
def golden_power(n: int) -> QuadraticElement:
    """beta**n = (L_n + F_n*sqrt5)/2 with L_n = F_n + 2 F_{n-1}."""
    if n < 0:
        return golden_power(-n).reciprocal()
    if n == 0:
        return QuadraticElement(1)
    f, f_prev = fibonacci(n), fibonacci(n - 1)
    return QuadraticElement(f + 2 * f_prev, f, 2)


# ---------------------------------------------------------------------------
# Balls
# ---------------------------------------------------------------------------


class Ball:
    """Closed interval ``[lo, hi] * 2**-precision`` known to contain a real.

    Stored as two integers on a fixed binary grid; every operation rounds
    outward, so results enclose the true value and evaluating the same
    expression on a finer grid yields a sub-interval.
    """

    __slots__ = ("lo", "hi", "precision")

    def __init__(self, lo: int, hi: int, precision: int):
        if lo > hi:
            raise ValueError("empty ball")
        self.lo = lo
        self.hi = hi
        self.precision = precision

    @classmethod
    def from_exact(cls, x, precision: int) -> "Ball":
        if isinstance(x, int):
            v = x << precision
            return cls(v, v, precision)
        if isinstance(x, Fraction):
            num = x.numerator << precision
            return cls(num // x.denominator, _ceil_div(num, x.denominator), precision)
        if isinstance(x, QuadraticElement):
            lo, hi = x.bounds(precision)
            return cls(lo, hi, precision)
        raise TypeError(f"not an exact scalar: {type(x).__name__}")

    @property
    def midpoint(self) -> Fraction:
        return Fraction(self.lo + self.hi, 1 << (self.precision + 1))

    @property
    def radius(self) -> Fraction:
        return Fraction(self.hi - self.lo, 1 << (self.precision + 1))

    @property
    def lower(self) -> Fraction:
        return Fraction(self.lo, 1 << self.precision)

    @property
    def upper(self) -> Fraction:
        return Fraction(self.hi, 1 << self.precision)

    def at(self, precision: int) -> "Ball":
        """Re-express on another grid (exact when refining, outward when coarsening)."""
        shift = precision - self.precision
        if shift == 0:
            return self
        if shift > 0:
            return Ball(self.lo << shift, self.hi << shift, precision)
        s = -shift
        return Ball(self.lo >> s, -((-self.hi) >> s), precision)

    def _coerce(self, other) -> "Ball":
        if isinstance(other, Ball):
            return other
        return Ball.from_exact(other, self.precision)

    def _aligned(self, other):
        other = self._coerce(other)
        if other.precision == self.precision:
            return self, other
        p = max(self.precision, other.precision)
        return self.at(p), other.at(p)

    def __add__(self, other):
        a, b = self._aligned(other)
        return Ball(a.lo + b.lo, a.hi + b.hi, a.precision)

    __radd__ = __add__

    def __neg__(self):
        return Ball(-self.hi, -self.lo, self.precision)

    def __sub__(self, other):
        a, b = self._aligned(other)
        return Ball(a.lo - b.hi, a.hi - b.lo, a.precision)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            lo, hi = self.lo * other, self.hi * other
            if other < 0:
                lo, hi = hi, lo
            return Ball(lo, hi, self.precision)
        a, b = self._aligned(other)
        p = a.precision
        if a.lo >= 0 and b.lo >= 0:
            lo, hi = a.lo * b.lo, a.hi * b.hi
        else:
            prods = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
            lo, hi = min(prods), max(prods)
        return Ball(lo >> p, -((-hi) >> p), p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._aligned(other)
        if b.lo <= 0 <= b.hi:
            raise ZeroDivisionError("ball divisor contains zero")
        p = a.precision
        nums = (a.lo << p, a.hi << p)
        floors = [_floor_div(n, d) for n in nums for d in (b.lo, b.hi)]
        ceils = [-_floor_div(-n, d) for n in nums for d in (b.lo, b.hi)]
        return Ball(min(floors), max(ceils), p)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def square(self) -> "Ball":
        p = self.precision
        if self.lo >= 0:
            lo, hi = self.lo * self.lo, self.hi * self.hi
        elif self.hi <= 0:
            lo, hi = self.hi * self.hi, self.lo * self.lo
        else:
            lo, hi = 0, max(self.lo * self.lo, self.hi * self.hi)
        return Ball(lo >> p, -((-hi) >> p), p)

    def sqrt(self) -> "Ball":
        if self.hi < 0:
            raise ValueError("sqrt of a negative ball")
        p = self.precision
        lo = math.isqrt(max(self.lo, 0) << p)
        hi = _ceil_isqrt(self.hi << p)
        return Ball(lo, hi, p)

    def intersect(self, other: "Ball") -> "Ball":
        a, b = self._aligned(other)
        return Ball(max(a.lo, b.lo), min(a.hi, b.hi), a.precision)

    def contains(self, x) -> bool:
        if isinstance(x, Ball):
            a, b = self._aligned(x)
            return a.lo <= b.lo and b.hi <= a.hi
        return self.lower <= _as_fraction_bound(x, self.precision + 2, True) and \
            _as_fraction_bound(x, self.precision + 2, False) <= self.upper

    def floor_range(self) -> tuple[int, int]:
        p = self.precision
        return self.lo >> p, self.hi >> p

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __repr__(self):
        return f"Ball(mid={float(self.midpoint)!r}, rad={float(self.radius):.3g}, prec={self.precision})"


def _as_fraction_bound(x, bits: int, lower: bool) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    b = Ball.from_exact(x, bits)
    return b.lower if lower else b.upper


# ---------------------------------------------------------------------------
# Refinable reals
# ---------------------------------------------------------------------------

BallEvaluator = Callable[..., Ball]


class RefinableReal:
    """A real number available as an enclosing :class:`Ball` at any precision.

    ``evaluator(bits, *parent_balls)`` must return a ball on the ``bits`` grid
    enclosing the value.  Nodes form a DAG through ``parents``; evaluation is
    iterative, so chains thousands of nodes deep are fine.  The best ball seen
    is cached.  Refinement mutates the cache and is not locked: confine a
    RefinableReal (and its ancestors) to one worker at a time.
    """

    __slots__ = ("_evaluator", "_parents", "_cache", "_serial", "label")
    _counter = itertools.count()

    def __init__(self, evaluator: BallEvaluator, parents: Sequence["RefinableReal"] = (), label: str = ""):
        self._evaluator = evaluator
        self._parents = tuple(parents)
        self._cache: Ball | None = None
        self._serial = next(RefinableReal._counter)
        self.label = label

    @classmethod
    def constant(cls, x) -> "RefinableReal":
        if isinstance(x, RefinableReal):
            return x
        if not is_exact(x):
            raise TypeError(f"not a real scalar: {type(x).__name__}")
        return cls(lambda bits: Ball.from_exact(x, bits), label="const" if bit_size(x) > 64 else str(x))

    def ball(self, bits: int) -> Ball:
        cached = self._cache
        if cached is not None and cached.precision >= bits:
            return cached
        pending = []
        seen = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if node._serial in seen:
                continue
            seen.add(node._serial)
            if node._cache is None or node._cache.precision < bits:
                pending.append(node)
                stack.extend(node._parents)
        pending.sort(key=lambda nd: nd._serial)
        for node in pending:
            args = [p._cache if p._cache.precision == bits else p._cache.at(bits) for p in node._parents]
            fresh = node._evaluator(bits, *args)
            if fresh.precision != bits:
                fresh = fresh.at(bits)
            if node._cache is not None:
                fresh = fresh.intersect(node._cache)
            node._cache = fresh
        return self._cache

    def map(self, fn: Callable[[Ball], Ball], label: str = "") -> "RefinableReal":
        return RefinableReal(lambda bits, b: fn(b), (self,), label)

    def _binary(self, other, op, label):
        if not isinstance(other, RefinableReal):
            if not is_exact(other):
                return NotImplemented
            other = RefinableReal.constant(other)
        return RefinableReal(lambda bits, a, b: op(a, b), (self, other), label)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    def __radd__(self, other):
        return self._binary(other, lambda a, b: b + a, "+")

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a, "-")

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    def __rmul__(self, other):
        return self._binary(other, lambda a, b: b * a, "*")

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b, "/")

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a, "/")

    def __neg__(self):
        return self.map(lambda b: -b, "neg")

    def sqrt(self) -> "RefinableReal":
        return self.map(Ball.sqrt, "sqrt")

    def square(self) -> "RefinableReal":
        return self.map(Ball.square, "sq")

    def __float__(self):
        return float(self.ball(64).midpoint)

    def __repr__(self):
        c = self._cache
        return f"RefinableReal({self.label or '?'}, {c!r})"


RealScalar = Union[int, Fraction, QuadraticElement, RefinableReal]


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, QuadraticElement))


def to_ball(x, bits: int) -> Ball:
    if isinstance(x, RefinableReal):
        return x.ball(bits)
    return Ball.from_exact(x, bits)


def _try_ball(x, bits: int) -> Ball | None:
    # a coarse ball may straddle a pole or a branch cut; finer ones may not
    try:
        return to_ball(x, bits)
    except (ZeroDivisionError, ValueError):
        return None


def _exact_cmp(x, y) -> Order:
    if isinstance(x, QuadraticElement) or isinstance(y, QuadraticElement):
        s = (QuadraticElement.coerce(x) - QuadraticElement.coerce(y)).sign()
    else:
        s = (x > y) - (x < y)
    return Order(s)


def compare(x, y, policy: PrecisionPolicy = DEFAULT_POLICY) -> Order:
    """Certified three-way comparison.

    Exact kinds compare exactly.  If either side is refinable the balls are
    refined along ``policy.schedule()`` until they are disjoint.  Two
    refinables are never reported equal unless they are the same object.
    """
    if is_exact(x) and is_exact(y):
        return _exact_cmp(x, y)
    if x is y:
        return Order.EQUAL
    both_refinable = isinstance(x, RefinableReal) and isinstance(y, RefinableReal)
    for bits in policy.schedule():
        bx, by = _try_ball(x, bits), _try_ball(y, bits)
        if bx is None or by is None:
            continue
        bx, by = bx._aligned(by)
        if bx.hi < by.lo:
            return Order.LESS
        if bx.lo > by.hi:
            return Order.GREATER
        if not both_refinable and bx.is_point and by.is_point and bx.lo == by.lo:
            return Order.EQUAL
    raise PrecisionExhausted(f"could not separate {x!r} and {y!r} with {policy}")


def floor(x, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """Greatest integer <= x."""
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    if isinstance(x, QuadraticElement):
        return x.floor()
    for bits in policy.schedule():
        b = _try_ball(x, bits)
        if b is None:
            continue
        f_lo, f_hi = b.floor_range()
        if f_lo == f_hi:
            return f_lo
    raise PrecisionExhausted(f"floor of {x!r} straddles an integer")


def side_floor(x, side: Side, policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """floor(x + eps) for FROM_RIGHT/AT, floor(x - eps) for FROM_LEFT."""
    if side is not Side.FROM_LEFT:
        return floor(x, policy)
    if is_exact(x):
        f = floor(x)
        return f - 1 if x == f else f
    for bits in policy.schedule():
        b = _try_ball(x, bits)
        if b is None:
            continue
        f_lo, f_hi = b.floor_range()
        if f_lo == f_hi:
            if b.is_point and b.lo == f_lo << b.precision:
                return f_lo - 1
            if b.lo != f_lo << b.precision:
                return f_lo
    raise PrecisionExhausted(f"floor of {x!r} from the left straddles an integer")


def log_estimate(x) -> float:
    """Approximate natural log of a positive scalar (magnitudes beyond float range ok)."""
    if isinstance(x, int):
        return math.log(x)
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    if isinstance(x, QuadraticElement):
        return x.log()
    b = x.ball(64)
    hi = b.hi if b.hi > 0 else 1
    return math.log(hi) - b.precision * math.log(2)


def bit_size(x) -> int:
    if isinstance(x, int):
        return x.bit_length()
    if isinstance(x, Fraction):
        return max(x.numerator.bit_length(), x.denominator.bit_length())
    if isinstance(x, QuadraticElement):
        return max(x.p.bit_length(), x.q.bit_length(), x.d.bit_length())
    return 0


# ---------------------------------------------------------------------------
# beta-integers (golden mean)
# ---------------------------------------------------------------------------


def _fib_upto(n: int) -> list[int]:
    """Fibonacci weights F_2, F_3, ... (1, 2, 3, 5, ...) of length n."""
    w = [1, 2]
    while len(w) < n:
        w.append(w[-1] + w[-2])
    return w[:n]


@total_ordering
class BetaInteger:
    """A golden-mean beta-integer ``sum a_i beta**i`` with no two adjacent 1s.

    ``word`` is the coefficient string, most significant first.  Value order
    coincides with the order of the Zeckendorf index ``sum a_i F_{i+2}``,
    which is what successor/predecessor use.
    """

    __slots__ = ("word", "_value", "_index")

    def __init__(self, word: str):
        word = word.lstrip("0") or "0"
        if set(word) - {"0", "1"}:
            raise ValueError(f"beta-integer word must be over {{0,1}}: {word!r}")
        if "11" in word:
            raise ValueError(f"adjacent 1s in beta-integer word {word!r}")
        self.word = word
        self._value = None
        self._index = None

    @property
    def value(self) -> QuadraticElement:
        if self._value is None:
            a, b = 0, 0  # value = a + b*beta, Horner on beta^2 = beta + 1
            for ch in self.word:
                a, b = b, a + b  # multiply by beta
                if ch == "1":
                    a += 1
            self._value = QuadraticElement(2 * a + b, b, 2)
        return self._value

    @property
    def index(self) -> int:
        if self._index is None:
            w = _fib_upto(len(self.word))
            self._index = sum(wt for wt, ch in zip(w, reversed(self.word)) if ch == "1")
        return self._index

    @classmethod
    def from_index(cls, n: int) -> "BetaInteger":
        if n < 0:
            raise ValueError("negative Zeckendorf index")
        if n == 0:
            return cls("0")
        w = [1, 2]
        while w[-1] <= n:
            w.append(w[-1] + w[-2])
        bits = []
        for wt in reversed(w[:-1]):
            if wt <= n:
                bits.append("1")
                n -= wt
            else:
                bits.append("0")
        out = cls("".join(bits))
        return out

    def successor(self) -> "BetaInteger":
        return BetaInteger.from_index(self.index + 1)

    def predecessor(self) -> "BetaInteger":
        return BetaInteger.from_index(self.index - 1)

    def __eq__(self, other):
        if isinstance(other, BetaInteger):
            return self.word == other.word
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, BetaInteger):
            return self.index < other.index
        return NotImplemented

    def __hash__(self):
        return hash(("beta", self.word))

    def __str__(self):
        return self.word

    def __repr__(self):
        return f"BetaInteger({self.word!r})"

    def __reduce__(self):
        return (BetaInteger, (self.word,))


def beta_floor(y, policy: PrecisionPolicy = DEFAULT_POLICY) -> BetaInteger:
    """Largest golden-mean beta-integer <= y (requires y >= 1).

    Greedy descent over the powers beta**n; after taking beta**n the remainder
    is below beta**(n-1), so the next candidate power is beta**(n-2) and no
    two adjacent 1s can occur.
    """
    if is_exact(y):
        fast = _beta_floor_certified(y)
        if fast is not None:
            return fast
    if compare(y, 1, policy) is Order.LESS:
        raise ValueError("beta_floor needs y >= 1")
    # top power: estimate from the magnitude, then correct exactly
    log_beta = math.log((1 + math.sqrt(5)) / 2)
    n = max(0, int(log_estimate(y) / log_beta) - 1)
    while n > 0 and compare(golden_power(n), y, policy) is Order.GREATER:
        n -= 1
    while compare(golden_power(n + 1), y, policy) is not Order.GREATER:
        n += 1
    bits = ["0"] * (n + 1)
    rem = y
    k = n
    while k >= 0:
        pk = golden_power(k)
        if compare(pk, rem, policy) is not Order.GREATER:
            bits[n - k] = "1"
            rem = rem - pk
            k -= 2
        else:
            k -= 1
    return BetaInteger("".join(bits))


_FAST_BITS = 96


@lru_cache(maxsize=None)
def _golden_power_grid(k: int) -> tuple[int, int]:
    b = Ball.from_exact(golden_power(k), _FAST_BITS)
    return b.lo, b.hi


def _beta_floor_certified(y) -> BetaInteger | None:
    """Greedy descent on a 96-bit enclosure of y.

    Returns None whenever some comparison is not decided by the enclosures
    (for instance when y is itself a beta-integer); the caller then falls back
    to exact comparisons.
    """
    yb = Ball.from_exact(y, _FAST_BITS)
    one = 1 << _FAST_BITS
    if yb.hi < one:
        raise ValueError("beta_floor needs y >= 1")
    if yb.lo < one:
        return None
    log_beta = math.log((1 + math.sqrt(5)) / 2)
    log_y = math.log(yb.hi) - _FAST_BITS * math.log(2)
    n = max(0, int(log_y / log_beta) - 1)
    while n > 0 and _golden_power_grid(n)[0] > yb.hi:
        n -= 1
    while True:
        lo, hi = _golden_power_grid(n + 1)
        if lo > yb.hi:
            break
        if hi > yb.lo:
            return None
        n += 1
    lo_n, hi_n = _golden_power_grid(n)
    if hi_n > yb.lo:
        return None
    bits = ["0"] * (n + 1)
    rem_lo, rem_hi = yb.lo, yb.hi
    k = n
    while k >= 0:
        p_lo, p_hi = _golden_power_grid(k)
        if p_hi <= rem_lo:
            bits[n - k] = "1"
            rem_lo, rem_hi = rem_lo - p_hi, rem_hi - p_lo
            k -= 2
        elif p_lo > rem_hi:
            k -= 1
        else:
            return None
    return BetaInteger("".join(bits))


# ---------------------------------------------------------------------------
# Nested radicals and pseudo-golden roots
# ---------------------------------------------------------------------------


def nested_radical(digits: Sequence[int], seed: int, bits: int) -> Ball:
    """Ball around psi_{e1} o ... o psi_{en}(seed), psi_e(y) = sqrt(y + 1 + e) - 1."""
    if len(digits) == 0:
        raise ValueError("nested_radical needs at least one digit")
    if seed not in (0, 1):
        raise ValueError("seed must be 0 or 1")
    one = 1 << bits
    y = Ball.from_exact(seed, bits)
    for e in reversed(digits):
        if e not in (0, 1, 2):
            raise ValueError(f"Bolyai digit out of range: {e}")
        y = Ball(y.lo + one * (1 + e), y.hi + one * (1 + e), bits).sqrt()
        y = Ball(y.lo - one, y.hi - one, bits)
    return y


def _pseudo_golden_sign(a: int, k: int, bits: int) -> int:
    """Sign of P(a / 2**bits) where P(X) = X^k - X^(k-1) - ... - 1."""
    s = 1 << bits
    acc = a**k
    term = s
    for j in range(k - 1, -1, -1):
        acc -= a**j * term
        term *= s
    return (acc > 0) - (acc < 0)


def root_of_pseudo_golden(k: int, bits: int = 256):
    """Positive root of X^k - X^(k-1) - ... - X - 1.

    Exact golden mean for k = 2; for k >= 3 a refinable real found by
    bisection on [1, 2] with exact dyadic sign tests (bisection continues from
    the tightest bracket found so far).
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k == 2:
        return GOLDEN
    state = {"lo": 1, "hi": 2, "bits": 0}

    def evaluate(b: int) -> Ball:
        shift = b - state["bits"]
        if shift > 0:
            lo, hi = state["lo"] << shift, state["hi"] << shift
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if _pseudo_golden_sign(mid, k, b) < 0:
                    lo = mid
                else:
                    hi = mid
            state.update(lo=lo, hi=hi, bits=b)
        return Ball(state["lo"], state["hi"], state["bits"]).at(b)

    root = RefinableReal(evaluate, label=f"pseudo_golden({k})")
    root.ball(bits)
    return root
