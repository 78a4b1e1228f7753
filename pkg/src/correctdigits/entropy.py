"""Entropy constants of the expansion maps, predicted m/n ratios and entropy estimates."""

from __future__ import annotations

import enum
import math
import statistics
from dataclasses import dataclass
from typing import Sequence

import mpmath

from .expansions import BetaCFMap, BolyaiMap, FibredMap, LurothMap, PseudoGoldenMap, RadixMap, RCFMap

WORKING_DPS = 50
LUROTH_TERMS = 10_000


class UnknownEntropy(LookupError):
    pass


class DegenerateSample(ValueError):
    pass


class Provenance(enum.Enum):
    CLOSED_FORM = "closed_form"
    SERIES_WITH_TAIL_BOUND = "series_with_tail_bound"
    ESTIMATED = "estimated"
    REFERENCE = "reference"


@dataclass(frozen=True)
class EntropyValue:
    """A value with an absolute error bound.

    For CLOSED_FORM and SERIES_WITH_TAIL_BOUND the bound is rigorous up to
    mpmath's working precision; ESTIMATED carries a standard error and
    REFERENCE an externally published value.
    """

    value: mpmath.mpf
    error: mpmath.mpf
    provenance: Provenance
    label: str = ""

    def __float__(self):
        return float(self.value)

    def contains(self, x) -> bool:
        return abs(mpmath.mpf(x) - self.value) <= self.error

    def to_dict(self, digits: int = 40) -> dict:
        return {
            "label": self.label,
            "value": mpmath.nstr(self.value, digits),
            "error": mpmath.nstr(self.error, 3),
            "provenance": self.provenance.value,
        }


# Fixed-point estimate of the Bolyai-map entropy from the literature (periodic
# orbit method); used only as a benchmark, never computed here.
BOLYAI_REFERENCE = EntropyValue(
    mpmath.mpf("1.056313074"), mpmath.mpf("5e-10"), Provenance.REFERENCE,
    "Bolyai map, published fixed-point estimate",
)


def _closed(value, label) -> EntropyValue:
    return EntropyValue(+value, mpmath.mpf(10) ** (-(mpmath.mp.dps - 5)), Provenance.CLOSED_FORM, label)


def rcf_entropy(dps: int = WORKING_DPS) -> EntropyValue:
    """pi^2 / (6 ln 2)."""
    with mpmath.workdps(dps):
        return _closed(mpmath.pi ** 2 / (6 * mpmath.log(2)), "RCF")


def radix_entropy(g: int, dps: int = WORKING_DPS) -> EntropyValue:
    with mpmath.workdps(dps):
        return _closed(mpmath.log(g), f"radix {g}")


def pseudo_golden_entropy(k: int, dps: int = WORKING_DPS) -> EntropyValue:
    """ln gamma_k with gamma_k the root of x^k = x^(k-1) + ... + 1 in (1, 2)."""
    with mpmath.workdps(dps + 10):
        if k == 2:
            gamma = (1 + mpmath.sqrt(5)) / 2
        else:
            poly = lambda x: x ** k - sum(x ** j for j in range(k))  # noqa: E731
            gamma = mpmath.findroot(poly, (mpmath.mpf(1), mpmath.mpf(2)), solver="anderson")
        value = mpmath.log(gamma)
    with mpmath.workdps(dps):
        return _closed(value, "golden mean" if k == 2 else f"pseudo-golden {k}")


def _luroth_term(x):
    w = x * (x + 1)
    return mpmath.log(w) / w


def luroth_entropy(terms: int = LUROTH_TERMS, dps: int = WORKING_DPS) -> EntropyValue:
    """sum_{k>=1} ln(k(k+1)) / (k(k+1)) as a partial sum plus a bracketed tail.

    The summand f is decreasing and convex on [2, inf), so with K = ``terms``
        int_{K+1}^inf f + f(K+1)/2  <=  sum_{k>K} f(k)  <=  int_{K+1/2}^inf f.
    The midpoint of the bracket is added and its half-width is the error.
    """
    if terms < 2:
        raise ValueError("need at least 2 terms")
    with mpmath.workdps(dps + 10):
        partial = mpmath.fsum(_luroth_term(mpmath.mpf(k)) for k in range(1, terms + 1))
        upper = mpmath.quad(_luroth_term, [terms + mpmath.mpf(1) / 2, mpmath.inf])
        lower = mpmath.quad(_luroth_term, [terms + 1, mpmath.inf]) + _luroth_term(mpmath.mpf(terms + 1)) / 2
        value = partial + (upper + lower) / 2
        error = (upper - lower) / 2 + mpmath.mpf(10) ** (-(dps - 5))
    with mpmath.workdps(dps):
        return EntropyValue(+value, +error, Provenance.SERIES_WITH_TAIL_BOUND, "Lueroth")


_LUROTH_CACHE: dict[tuple[int, int], EntropyValue] = {}


def entropy_constant(fmap: FibredMap, dps: int = WORKING_DPS) -> EntropyValue:
    """Known entropy of ``fmap`` with an error bound; UnknownEntropy otherwise."""
    if isinstance(fmap, RCFMap):
        return rcf_entropy(dps)
    if isinstance(fmap, RadixMap):
        return radix_entropy(fmap.g, dps)
    if isinstance(fmap, LurothMap):
        key = (LUROTH_TERMS, dps)
        if key not in _LUROTH_CACHE:
            _LUROTH_CACHE[key] = luroth_entropy(LUROTH_TERMS, dps)
        return _LUROTH_CACHE[key]
    if isinstance(fmap, PseudoGoldenMap):
        return pseudo_golden_entropy(fmap.k, dps)
    if isinstance(fmap, (BolyaiMap, BetaCFMap)):
        raise UnknownEntropy(f"no known entropy value for the {fmap.name} map")
    raise UnknownEntropy(f"no entropy rule for {fmap!r}")


def _weaker(a: Provenance, b: Provenance) -> Provenance:
    order = [Provenance.CLOSED_FORM, Provenance.SERIES_WITH_TAIL_BOUND, Provenance.REFERENCE, Provenance.ESTIMATED]
    return max(a, b, key=order.index)


def lochs_ratio(mapS: FibredMap, mapT: FibredMap, dps: int = WORKING_DPS) -> EntropyValue:
    """h(S)/h(T), the almost-sure limit of m/n, with a propagated error bound."""
    hs, ht = entropy_constant(mapS, dps), entropy_constant(mapT, dps)
    return divide(hs, ht, f"{hs.label} / {ht.label}", dps)


def divide(a: EntropyValue, b: EntropyValue, label: str = "", dps: int = WORKING_DPS) -> EntropyValue:
    with mpmath.workdps(dps):
        q = a.value / b.value
        # |a/b - A/B| <= (ea + |q| eb) / (|b| - eb) to first order, plus rounding
        err = (a.error + abs(q) * b.error) / (abs(b.value) - b.error) + mpmath.mpf(10) ** (-(dps - 5))
        return EntropyValue(q, err, _weaker(a.provenance, b.provenance), label)


@dataclass(frozen=True)
class EstimateReport:
    """Summary of m/n samples and the entropy they imply for the unknown side."""

    mean: float
    std: float
    count: int
    stderr: float
    known_side: str
    known_entropy: float
    estimate: float
    estimate_stderr: float
    predicted_ratio: float | None = None

    def to_dict(self) -> dict:
        return {
            "mean_ratio": self.mean,
            "std_ratio": self.std,
            "count": self.count,
            "stderr_ratio": self.stderr,
            "known_side": self.known_side,
            "known_entropy": self.known_entropy,
            "estimate": self.estimate,
            "estimate_stderr": self.estimate_stderr,
            "predicted_ratio": self.predicted_ratio,
        }


def estimate_entropy(samples: Sequence[float], known_side: str, h, predicted_ratio=None) -> EstimateReport:
    """Invert m/n -> h(S)/h(T) for the side that is not known.

    With S known the estimate is h / mean(m/n) (ratio of averages, not the
    average of per-trial ratios) and its standard error follows from the delta
    method; with T known it is h * mean(m/n).
    """
    side = known_side.upper()
    if side not in ("S", "T"):
        raise ValueError("known_side must be 'S' or 'T'")
    values = [float(v) for v in samples]
    if not values:
        raise ValueError("no samples")
    h = float(h)
    if h <= 0:
        raise ValueError("entropy must be positive")
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    se = std / math.sqrt(len(values))
    if side == "S":
        if any(v == 0 for v in values):
            raise DegenerateSample("a trial determined no T-digits; h(S)/0 is undefined")
        est, est_se = h / mean, h * se / mean ** 2
    else:
        est, est_se = h * mean, h * se
    pr = float(predicted_ratio) if predicted_ratio is not None else None
    return EstimateReport(mean, std, len(values), se, side, h, est, est_se, pr)


CONVERSION_CAVEAT = (
    "The mean m/n converts to an entropy in two ways. Dividing the known entropy "
    "by m/n treats m/n as h(S)/h(T) with S the known map; multiplying treats it as "
    "h(T)/h(S). The two readings disagree and neither is endorsed here."
)


def dual_conversions(mean_ratio: float, h_known: float) -> dict:
    """Both readings of an m/n average as an entropy, labelled, with the caveat."""
    return {
        "mean_ratio": mean_ratio,
        "h_known_over_ratio": h_known / mean_ratio if mean_ratio else None,
        "ratio_times_h_known": h_known * mean_ratio,
        "caveat": CONVERSION_CAVEAT,
    }
