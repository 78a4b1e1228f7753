"""Fibred maps on [0, 1): digits, branches, cylinders and cylinder measures.

Every map is described by a :class:`FibredMap` subclass.  Points are
``RealScalar`` values (see :mod:`correctdigits.numeric`); digit decisions take a
:class:`Side` so that cylinder endpoints can be read as one-sided limits.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Sequence

from .numeric import (
    DEFAULT_POLICY,
    BetaInteger,
    Order,
    PrecisionPolicy,
    QuadraticElement,
    RefinableReal,
    Side,
    beta_floor,
    bit_size,
    compare,
    golden_power,
    is_exact,
    nested_radical,
    root_of_pseudo_golden,
    side_floor,
)

# digit of 0 approached from the right under a map whose digits grow like 1/x
INFINITE_DIGIT = math.inf


class InadmissibleDigits(ValueError):
    pass


def _exact(x):
    """Promote ints so that ``/`` never produces a float."""
    return Fraction(x) if isinstance(x, int) else x


def _is_zero(x) -> bool:
    return is_exact(x) and x == 0


@dataclass(frozen=True)
class Cylinder:
    """The set of points whose first ``len(digits)`` digits are ``digits``."""

    digits: tuple
    left: object
    right: object
    left_closed: bool = True
    right_closed: bool = False

    def width(self):
        return self.right - self.left

    def contains(self, x, policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
        lo = compare(self.left, x, policy)
        hi = compare(x, self.right, policy)
        ok_lo = lo is Order.LESS or (lo is Order.EQUAL and self.left_closed)
        ok_hi = hi is Order.LESS or (hi is Order.EQUAL and self.right_closed)
        return ok_lo and ok_hi

    def encloses(self, left, right, policy: PrecisionPolicy = DEFAULT_POLICY) -> bool:
        """Whether the open interval (left, right) lies inside this cylinder."""
        return compare(self.left, left, policy) is not Order.GREATER and \
            compare(right, self.right, policy) is not Order.GREATER


# ---------------------------------------------------------------------------
# Branch compositions along a digit prefix
# ---------------------------------------------------------------------------


class Prefix:
    """T^m along a known digit prefix, plus the matching inverse-branch map.

    ``image(x)`` is T^m(x) for x in the closure of the prefix cylinder and
    ``preimage(y)`` composes the inverse branches.  ``parity`` is +1 when the
    composition is increasing, -1 when it reverses orientation.
    """

    def __init__(self, fmap: "FibredMap"):
        self.map = fmap
        self.digits: list = []
        self.parity = 1

    def __len__(self):
        return len(self.digits)

    def push(self, digit):
        self.digits.append(digit)
        self.parity *= self.map.orientation(digit)

    def copy(self) -> "Prefix":
        new = copy.copy(self)
        new.digits = list(self.digits)
        return new

    def image(self, x, policy: PrecisionPolicy = DEFAULT_POLICY):
        for d in self.digits:
            x = self.map.apply(x, d, policy)
        return x

    def preimage(self, y, policy: PrecisionPolicy = DEFAULT_POLICY):
        for d in reversed(self.digits):
            y = self.map.inverse_branch(d, y)
        return y


class AffinePrefix(Prefix):
    """T^m(x) = scale * x + offset for maps with affine branches."""

    def __init__(self, fmap):
        super().__init__(fmap)
        self.scale = Fraction(1)
        self.offset = Fraction(0)

    def push(self, digit):
        a, b = self.map.affine_branch(digit)
        self.scale = a * self.scale
        self.offset = a * self.offset + b
        super().push(digit)

    def image(self, x, policy=DEFAULT_POLICY):
        return self.scale * _exact(x) + self.offset

    def preimage(self, y, policy=DEFAULT_POLICY):
        return (_exact(y) - self.offset) / self.scale


class MobiusPrefix(Prefix):
    """Continued-fraction style prefixes: x = (p_m + t p_{m-1}) / (q_m + t q_{m-1})."""

    def __init__(self, fmap):
        super().__init__(fmap)
        self.p_prev, self.p = 1, 0
        self.q_prev, self.q = 0, 1

    def push(self, digit):
        b = self.map.digit_value(digit)
        self.p_prev, self.p = self.p, b * self.p + self.p_prev
        self.q_prev, self.q = self.q, b * self.q + self.q_prev
        super().push(digit)

    def image(self, x, policy=DEFAULT_POLICY):
        x = _exact(x)
        return (self.p - x * self.q) / (x * self.q_prev - self.p_prev)

    def preimage(self, y, policy=DEFAULT_POLICY):
        y = _exact(y)
        return (self.p + y * self.p_prev) / (self.q + y * self.q_prev)


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------


class FibredMap:
    """Base class for an expansion map T on [0, 1) with digit map k.

    Subclasses define the digit rule, the branch ``apply``, the inverse
    branches and the cells.  ``at_side`` names the one-sided rule that agrees
    with the half-open cell convention, so ``digit_of(x, Side.AT)`` is cell
    membership.
    """

    name = "map"
    spec = "map"
    full_branches = True
    at_side = Side.FROM_RIGHT
    bits_per_digit: float | None = None

    # -- to override -------------------------------------------------------
    def _digit(self, x, side: Side, policy: PrecisionPolicy):
        raise NotImplementedError

    def apply(self, x, digit, policy: PrecisionPolicy = DEFAULT_POLICY):
        raise NotImplementedError

    def inverse_branch(self, digit, y):
        raise NotImplementedError

    def orientation(self, digit) -> int:
        return 1

    def cell(self, digit) -> Cylinder:
        raise NotImplementedError

    def is_digit(self, digit) -> bool:
        raise NotImplementedError

    def small_digits(self, bound: int) -> list:
        raise NotImplementedError

    def new_prefix(self) -> Prefix:
        return Prefix(self)

    # -- shared ------------------------------------------------------------
    def digit_of(self, x, side: Side = Side.AT, policy: PrecisionPolicy = DEFAULT_POLICY):
        """Digit of x (AT), of x + eps (FROM_RIGHT) or of x - eps (FROM_LEFT).

        Returns None when x has no digit (the orbit terminated) and
        INFINITE_DIGIT for 0 approached from the right under maps whose
        digits are unbounded near 0.
        """
        if side is Side.AT:
            side = self.at_side
        return self._digit(_exact(x), side, policy)

    def is_admissible(self, digits: Sequence) -> bool:
        if not all(self.is_digit(d) for d in digits):
            return False
        if self.full_branches:
            return True
        try:
            self.cylinder(digits)
        except InadmissibleDigits:
            return False
        return True

    def cylinder(self, digits: Sequence, policy: PrecisionPolicy = DEFAULT_POLICY) -> Cylinder:
        return self.compose_cylinder(digits, policy)

    def compose_cylinder(self, digits: Sequence, policy: PrecisionPolicy = DEFAULT_POLICY) -> Cylinder:
        """Cylinder endpoints by composing inverse branches on [0, 1).

        Decreasing branches swap the endpoint roles.  For maps whose branches
        are not onto, each step is intersected with the digit's cell; an empty
        intersection means the digit string is inadmissible.
        """
        digits = tuple(digits)
        for d in digits:
            if not self.is_digit(d):
                raise InadmissibleDigits(f"{d!r} is not a digit of {self.name}")
        lo, lo_closed, hi, hi_closed = Fraction(0), True, Fraction(1), False
        for d in reversed(digits):
            a, b = self.inverse_branch(d, lo), self.inverse_branch(d, hi)
            if self.orientation(d) > 0:
                lo, hi = a, b
            else:
                lo, lo_closed, hi, hi_closed = b, hi_closed, a, lo_closed
            if not self.full_branches:
                c = self.cell(d)
                o = compare(c.left, lo, policy)
                if o is Order.GREATER:
                    lo, lo_closed = c.left, c.left_closed
                elif o is Order.EQUAL:
                    lo_closed = lo_closed and c.left_closed
                o = compare(c.right, hi, policy)
                if o is Order.LESS:
                    hi, hi_closed = c.right, c.right_closed
                elif o is Order.EQUAL:
                    hi_closed = hi_closed and c.right_closed
                if compare(lo, hi, policy) is not Order.LESS:
                    raise InadmissibleDigits(f"{format_digits(digits)} is not admissible for {self.name}")
        return Cylinder(digits, lo, hi, lo_closed, hi_closed)

    def cylinder_series(self, digits: Sequence, policy: PrecisionPolicy = DEFAULT_POLICY) -> Iterator[Cylinder]:
        """Cylinders of ranks 1..len(digits) along ``digits``."""
        digits = tuple(digits)
        if not self.full_branches:
            for n in range(1, len(digits) + 1):
                yield self.cylinder(digits[:n], policy)
            return
        prefix = self.new_prefix()
        for n, d in enumerate(digits, 1):
            if not self.is_digit(d):
                raise InadmissibleDigits(f"{d!r} is not a digit of {self.name}")
            prefix.push(d)
            a, b = prefix.preimage(Fraction(0), policy), prefix.preimage(Fraction(1), policy)
            if prefix.parity > 0:
                yield Cylinder(digits[:n], a, b, True, False)
            else:
                yield Cylinder(digits[:n], b, a, False, True)

    def format_digit(self, digit) -> str:
        return str(digit)

    def parse_digit(self, token: str):
        return int(token)

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec}>"

    def __eq__(self, other):
        return isinstance(other, FibredMap) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __reduce__(self):
        return (make_map, (self.spec,))


class RadixMap(FibredMap):
    """g-adic map T(x) = g x - floor(g x), cells [i/g, (i+1)/g)."""

    def __init__(self, g: int):
        if g < 2:
            raise ValueError("radix must be at least 2")
        self.g = g
        self.name = {2: "binary", 10: "decimal"}.get(g, f"{g}-adic")
        self.spec = {2: "binary", 10: "decimal"}.get(g, f"radix:{g}")
        self.bits_per_digit = math.log2(g)

    def _digit(self, x, side, policy):
        return min(max(side_floor(self.g * x, side, policy), 0), self.g - 1)

    def apply(self, x, digit, policy=DEFAULT_POLICY):
        return self.g * _exact(x) - digit

    def inverse_branch(self, digit, y):
        return (_exact(y) + digit) / self.g

    def affine_branch(self, digit):
        return self.g, -digit

    def cell(self, digit):
        return Cylinder((digit,), Fraction(digit, self.g), Fraction(digit + 1, self.g))

    def is_digit(self, digit):
        return isinstance(digit, int) and 0 <= digit < self.g

    def small_digits(self, bound):
        return list(range(self.g))

    def new_prefix(self):
        return AffinePrefix(self)

    def cylinder(self, digits, policy=DEFAULT_POLICY):
        digits = tuple(digits)
        if not all(self.is_digit(d) for d in digits):
            raise InadmissibleDigits(f"not {self.name} digits: {digits}")
        k = 0
        for d in digits:
            k = k * self.g + d
        den = self.g ** len(digits)
        return Cylinder(digits, Fraction(k, den), Fraction(k + 1, den))


class _ReciprocalDigitMixin:
    """Digit read off y = 1/x; unbounded digits near 0."""

    def _digit(self, x, side, policy):
        if _is_zero(x):
            if side is Side.FROM_RIGHT:
                return INFINITE_DIGIT
            return None
        y = Fraction(1) / x
        # 1/x is decreasing: x + eps corresponds to y - eps
        flipped = Side.FROM_LEFT if side is Side.FROM_RIGHT else Side.FROM_RIGHT
        return self._digit_from_reciprocal(y, flipped, policy)

    def _digit_from_reciprocal(self, y, side, policy):
        return side_floor(y, side, policy)

    def digit_of(self, x, side=Side.AT, policy=DEFAULT_POLICY):
        x = _exact(x)
        if side is Side.AT:
            if _is_zero(x):
                return None
            side = self.at_side
        return self._digit(x, side, policy)

    def is_digit(self, digit):
        return isinstance(digit, int) and not isinstance(digit, bool) and digit >= 1

    def small_digits(self, bound):
        return list(range(1, bound + 1))


class RCFMap(_ReciprocalDigitMixin, FibredMap):
    """Regular continued fraction map T(x) = 1/x - floor(1/x), cells (1/(i+1), 1/i]."""

    name = "RCF"
    spec = "rcf"
    at_side = Side.FROM_LEFT

    def apply(self, x, digit, policy=DEFAULT_POLICY):
        return Fraction(1) / _exact(x) - digit

    def inverse_branch(self, digit, y):
        return Fraction(1) / (digit + _exact(y))

    def orientation(self, digit):
        return -1

    def digit_value(self, digit):
        return digit

    def cell(self, digit):
        return Cylinder((digit,), Fraction(1, digit + 1), Fraction(1, digit), False, True)

    def new_prefix(self):
        return MobiusPrefix(self)


class LurothMap(_ReciprocalDigitMixin, FibredMap):
    """Lueroth series map (increasing linear branches) or its alternating variant.

    Cells have endpoints 1/(i+1) and 1/i.  The plain map uses [1/(i+1), 1/i)
    with T(x) = i(i+1)x - i; the alternating map uses (1/(i+1), 1/i] with
    T(x) = (i+1) - i(i+1)x, so both branches land on [0, 1).
    """

    def __init__(self, alternating: bool = False):
        self.alternating = alternating
        self.name = "alternating Lueroth" if alternating else "Lueroth"
        self.spec = "alt-luroth" if alternating else "luroth"
        self.at_side = Side.FROM_LEFT if alternating else Side.FROM_RIGHT

    def affine_branch(self, digit):
        w = digit * (digit + 1)
        return (-w, digit + 1) if self.alternating else (w, -digit)

    def apply(self, x, digit, policy=DEFAULT_POLICY):
        a, b = self.affine_branch(digit)
        return a * _exact(x) + b

    def inverse_branch(self, digit, y):
        a, b = self.affine_branch(digit)
        return (_exact(y) - b) / a

    def orientation(self, digit):
        return -1 if self.alternating else 1

    def cell(self, digit):
        if self.alternating:
            return Cylinder((digit,), Fraction(1, digit + 1), Fraction(1, digit), False, True)
        return Cylinder((digit,), Fraction(1, digit + 1), Fraction(1, digit), True, False)

    def new_prefix(self):
        return AffinePrefix(self)


class BolyaiMap(FibredMap):
    """T(x) = (x+1)^2 - 1 - e with cells [0, sqrt2-1), [sqrt2-1, sqrt3-1), [sqrt3-1, 1).

    Exact rational orbits square their size every step; once a rational
    exceeds ``4 * policy.initial_bits`` bits it is handed over to ball
    arithmetic.
    """

    name = "Bolyai"
    spec = "bolyai"
    bits_per_digit = 2.0

    def _digit(self, x, side, policy):
        if isinstance(x, RefinableReal):
            y = x.map(lambda b: (b + 1).square() - 1)
        else:
            y = (x + 1) * (x + 1) - 1
        return min(max(side_floor(y, side, policy), 0), 2)

    def apply(self, x, digit, policy=DEFAULT_POLICY):
        x = _exact(x)
        if is_exact(x) and bit_size(x) > 4 * policy.initial_bits:
            x = RefinableReal.constant(x)
        if isinstance(x, RefinableReal):
            shift = 1 + digit
            return x.map(lambda b: (b + 1).square() - shift, f"bolyai[{digit}]")
        return (x + 1) * (x + 1) - 1 - digit

    def inverse_branch(self, digit, y):
        y = _exact(y)
        if isinstance(y, Fraction):
            t = y + 1 + digit
            rn, rd = math.isqrt(t.numerator), math.isqrt(t.denominator)
            if rn * rn == t.numerator and rd * rd == t.denominator:
                return Fraction(rn, rd) - 1
        return (RefinableReal.constant(y) + (1 + digit)).sqrt() - 1

    def cell(self, digit):
        return self.cylinder((digit,))

    def is_digit(self, digit):
        return digit in (0, 1, 2) and isinstance(digit, int)

    def small_digits(self, bound):
        return [0, 1, 2]

    def cylinder(self, digits, policy=DEFAULT_POLICY):
        digits = tuple(digits)
        if not digits:
            return Cylinder((), Fraction(0), Fraction(1))
        if not all(self.is_digit(d) for d in digits):
            raise InadmissibleDigits(f"not Bolyai digits: {digits}")
        left = _radical_endpoint(digits, 0)
        right = _radical_endpoint(digits, 1)
        return Cylinder(digits, left, right)


def _radical_endpoint(digits, seed):
    # psi_0(0) = 0 and psi_2(1) = 1: trailing runs collapse to the seed
    trail = 0 if seed == 0 else 2
    core = list(digits)
    while core and core[-1] == trail:
        core.pop()
    if not core:
        return Fraction(seed)
    return _radical(tuple(core), seed)


@lru_cache(maxsize=4096)
def _radical(core, seed):
    # one object per value, so equal endpoints compare equal by identity
    return RefinableReal(lambda bits: nested_radical(core, seed, bits), label=f"radical{seed}")


class BetaCFMap(_ReciprocalDigitMixin, FibredMap):
    """Golden-mean beta-continued fractions: T(x) = 1/x - [1/x]_beta.

    Digits are beta-integers; the cell of b is (1/b', 1/b] with b' the next
    beta-integer, so branches map onto [0, b' - b) and not every digit string
    is admissible.
    """

    name = "beta-CF"
    spec = "beta-cf"
    full_branches = False
    at_side = Side.FROM_LEFT

    def __init__(self):
        # one-entry memo: digit_of and apply on the same orbit point share 1/x
        self._memo = (None, None)

    def _reciprocal(self, x):
        if self._memo[0] is x:
            return self._memo[1]
        y = Fraction(1) / x
        self._memo = (x, y)
        return y

    def _digit(self, x, side, policy):
        if _is_zero(x):
            return INFINITE_DIGIT if side is Side.FROM_RIGHT else None
        flipped = Side.FROM_LEFT if side is Side.FROM_RIGHT else Side.FROM_RIGHT
        return self._digit_from_reciprocal(self._reciprocal(x), flipped, policy)

    def _digit_from_reciprocal(self, y, side, policy):
        b = beta_floor(y, policy)
        if side is Side.FROM_LEFT and compare(y, b.value, policy) is Order.EQUAL:
            return b.predecessor()
        return b

    def digit_value(self, digit):
        return digit.value

    def apply(self, x, digit, policy=DEFAULT_POLICY):
        return self._reciprocal(_exact(x)) - digit.value

    def inverse_branch(self, digit, y):
        return Fraction(1) / (digit.value + _exact(y))

    def orientation(self, digit):
        return -1

    def cell(self, digit):
        return Cylinder((digit,), Fraction(1) / digit.successor().value, Fraction(1) / digit.value, False, True)

    def is_digit(self, digit):
        return isinstance(digit, BetaInteger) and digit.index >= 1

    def small_digits(self, bound):
        return [BetaInteger.from_index(i) for i in range(1, bound + 1)]

    def new_prefix(self):
        return MobiusPrefix(self)

    def format_digit(self, digit):
        return digit.word

    def parse_digit(self, token):
        return BetaInteger(token)


class PseudoGoldenMap(FibredMap):
    """gamma-adic map T(x) = gamma x - floor(gamma x), gamma the pseudo-golden mean of order k.

    Admissible strings are those without k consecutive 1s.  For k = 2 all
    arithmetic is exact in Q(sqrt 5); for k >= 3 gamma is a refinable real.
    """

    full_branches = False

    def __init__(self, k: int = 2):
        if k < 2:
            raise ValueError("k must be at least 2")
        self.k = k
        self.gamma = root_of_pseudo_golden(k)
        self.inv_gamma = Fraction(1) / self.gamma
        self.name = "golden-mean" if k == 2 else f"pseudo-golden({k})"
        self.spec = "golden" if k == 2 else f"pseudo-golden:{k}"
        g = (1 + math.sqrt(5)) / 2 if k == 2 else float(self.gamma)
        self.bits_per_digit = math.log2(g)
        self._powers = [Fraction(1)]

    def inv_power(self, n: int):
        """gamma ** -n."""
        if self.k == 2:
            return golden_power(-n)
        while len(self._powers) <= n:
            self._powers.append(self._powers[-1] * self.inv_gamma)
        return self._powers[n]

    def _digit(self, x, side, policy):
        return min(max(side_floor(self.gamma * x, side, policy), 0), 1)

    def apply(self, x, digit, policy=DEFAULT_POLICY):
        return self.gamma * _exact(x) - digit

    def inverse_branch(self, digit, y):
        return (_exact(y) + digit) * self.inv_gamma

    def affine_branch(self, digit):
        return self.gamma, -digit

    def cell(self, digit):
        if digit == 0:
            return Cylinder((0,), Fraction(0), self.inv_gamma)
        return Cylinder((1,), self.inv_gamma, Fraction(1))

    def is_digit(self, digit):
        return digit in (0, 1) and isinstance(digit, int)

    def is_admissible(self, digits):
        return all(self.is_digit(d) for d in digits) and "1" * self.k not in "".join(map(str, digits))

    def small_digits(self, bound):
        return [0, 1]

    def new_prefix(self):
        return AffinePrefix(self)

    def tail_measure(self, trailing_ones: int):
        """Length of T^m(cylinder): sum_{j=1}^{k-r} gamma^-j for r trailing 1s."""
        total = Fraction(0)
        for j in range(1, self.k - trailing_ones + 1):
            total = total + self.inv_power(j)
        return total

    def cylinder(self, digits, policy=DEFAULT_POLICY):
        digits = tuple(digits)
        if not self.is_admissible(digits):
            raise InadmissibleDigits(f"{format_digits(digits)} has {self.k} consecutive 1s or bad digits")
        left = Fraction(0)
        for i, d in enumerate(digits, 1):
            if d:
                left = left + self.inv_power(i)
        r = _trailing_ones(digits)
        width = self.inv_power(len(digits)) * self.tail_measure(r)
        return Cylinder(digits, left, left + width)

    def cylinder_series(self, digits, policy=DEFAULT_POLICY):
        digits = tuple(digits)
        left = Fraction(0)
        run = 0
        for n, d in enumerate(digits, 1):
            if not self.is_digit(d):
                raise InadmissibleDigits(f"{d!r} is not a digit of {self.name}")
            run = run + 1 if d == 1 else 0
            if run >= self.k:
                raise InadmissibleDigits(f"{self.k} consecutive 1s at position {n}")
            if d:
                left = left + self.inv_power(n)
            width = self.inv_power(n) * self.tail_measure(run)
            yield Cylinder(digits[:n], left, left + width)


def _trailing_ones(digits) -> int:
    r = 0
    for d in reversed(digits):
        if d != 1:
            break
        r += 1
    return r


# ---------------------------------------------------------------------------
# Registry and module-level operations
# ---------------------------------------------------------------------------


def make_map(spec: str) -> FibredMap:
    """Build a map from its spec string (``decimal``, ``radix:7``, ``rcf``, ...)."""
    s = spec.strip().lower()
    if s == "decimal":
        return RadixMap(10)
    if s == "binary":
        return RadixMap(2)
    if s.startswith("radix:"):
        return RadixMap(int(s.split(":", 1)[1]))
    if s.endswith("-adic") and s[:-5].isdigit():
        return RadixMap(int(s[:-5]))
    if s.isdigit():
        return RadixMap(int(s))
    if s in ("rcf", "cf"):
        return RCFMap()
    if s == "luroth":
        return LurothMap(False)
    if s in ("alt-luroth", "alternating-luroth"):
        return LurothMap(True)
    if s == "bolyai":
        return BolyaiMap()
    if s in ("beta-cf", "betacf"):
        return BetaCFMap()
    if s in ("golden", "gamma", "golden-mean"):
        return PseudoGoldenMap(2)
    if s.startswith("pseudo-golden:"):
        return PseudoGoldenMap(int(s.split(":", 1)[1]))
    raise ValueError(f"unknown map {spec!r}")


def format_digits(digits: Iterable, fmap: FibredMap | None = None) -> str:
    fmt = fmap.format_digit if fmap is not None else str
    return ",".join(fmt(d) for d in digits)


def parse_digits(text: str, fmap: FibredMap) -> tuple:
    text = text.strip()
    if not text:
        return ()
    return tuple(fmap.parse_digit(tok.strip()) for tok in text.split(","))


def digit_of(fmap: FibredMap, x, side: Side = Side.AT, policy: PrecisionPolicy = DEFAULT_POLICY):
    return fmap.digit_of(x, side, policy)


def apply(fmap: FibredMap, x, digit, policy: PrecisionPolicy = DEFAULT_POLICY):
    return fmap.apply(x, digit, policy)


def cylinder(fmap: FibredMap, digits: Sequence, policy: PrecisionPolicy = DEFAULT_POLICY) -> Cylinder:
    return fmap.cylinder(tuple(digits), policy)


def expand(fmap: FibredMap, x, count: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> tuple:
    """First ``count`` digits of x; a shorter tuple means the orbit terminated."""
    digits = []
    y = _exact(x)
    for _ in range(count):
        d = fmap.digit_of(y, Side.AT, policy)
        if d is None:
            break
        digits.append(d)
        y = fmap.apply(y, d, policy)
    return tuple(digits)


def rcf_cylinder_measure(digits: Sequence[int]) -> Fraction:
    """Lebesgue measure 1/(Q_m (Q_m + Q_{m-1})) of an RCF cylinder."""
    q_prev, q = 0, 1
    for a in digits:
        if a < 1:
            raise ValueError("partial quotients must be >= 1")
        q_prev, q = q, a * q + q_prev
    return Fraction(1, q * (q + q_prev))


def pseudo_golden_cylinder_measure(k: int, digits: Sequence[int]):
    fmap = PseudoGoldenMap(k) if k != 2 else _GOLDEN_MAP
    if not fmap.is_admissible(digits):
        raise InadmissibleDigits(f"{format_digits(digits)} not admissible for k={k}")
    return fmap.inv_power(len(digits)) * fmap.tail_measure(_trailing_ones(digits))


_GOLDEN_MAP = PseudoGoldenMap(2)


def golden_beta_map(k: int = 2) -> PseudoGoldenMap:
    """The gamma-adic map for the pseudo-golden mean of order k (golden mean by default)."""
    return _GOLDEN_MAP if k == 2 else PseudoGoldenMap(k)


def _approx(x) -> float:
    return float(x)


def adjacent_ratio_scan(fmap: FibredMap, rank: int, digit_bound: int,
                        policy: PrecisionPolicy = DEFAULT_POLICY):
    """Largest measure ratio between adjacent cylinders of rank <= ``rank``.

    Enumerates admissible strings over ``fmap.small_digits(digit_bound)``;
    two cylinders are adjacent when they share the parent string and their
    closures touch.  Exact maps give an exact Fraction/QuadraticElement.
    """
    alphabet = fmap.small_digits(digit_bound)
    best = None
    for r in range(1, rank + 1):
        groups: dict[tuple, list[Cylinder]] = {}
        for word in product(alphabet, repeat=r):
            if not fmap.is_admissible(word):
                continue
            groups.setdefault(word[:-1], []).append(fmap.cylinder(word, policy))
        for cyls in groups.values():
            exact = all(is_exact(c.left) and is_exact(c.right) for c in cyls)
            key = (lambda c: _exact(c.left)) if exact else (lambda c: _approx(c.left))
            if exact and any(isinstance(c.left, QuadraticElement) for c in cyls):
                key = lambda c: QuadraticElement.coerce(_exact(c.left))  # noqa: E731
            cyls = sorted(cyls, key=key)
            for a, b in zip(cyls, cyls[1:]):
                if exact:
                    touching = a.right == b.left
                    wa, wb = a.width(), b.width()
                else:
                    touching = math.isclose(_approx(a.right), _approx(b.left), rel_tol=1e-12, abs_tol=1e-15)
                    wa, wb = _approx(a.width()), _approx(b.width())
                if not touching:
                    continue
                if exact:
                    ratio = wa / wb if compare(_exact(wa), _exact(wb)) is not Order.LESS else wb / wa
                    if best is None or compare(_exact(ratio), _exact(best)) is Order.GREATER:
                        best = ratio
                else:
                    ratio = max(wa / wb, wb / wa)
                    best = ratio if best is None else max(float(best), ratio)
    return best
