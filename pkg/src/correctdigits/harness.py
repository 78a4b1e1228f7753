"""Experiment runner: seeded trials, aggregation and report views.

Randomness comes from numpy's PCG64.  A master seed is expanded with
``SeedSequence(master).spawn(trials)`` so trial i always sees the same stream,
whatever the number of worker processes.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .entropy import (
    BOLYAI_REFERENCE,
    DegenerateSample,
    UnknownEntropy,
    dual_conversions,
    entropy_constant,
    estimate_entropy,
    lochs_ratio,
)
from .expansions import (
    BetaCFMap,
    BolyaiMap,
    FibredMap,
    PseudoGoldenMap,
    RadixMap,
    RCFMap,
    make_map,
)
from .lochs import (
    AgreementResult,
    HitType,
    MSeries,
    Status,
    determined_digits,
    ell,
    golden_jump_violations,
    hang_frequency,
    jump_bound_violations,
    jump_times,
    m_series,
    policy_for,
    sandwich_violations,
)
from .numeric import PrecisionPolicy

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

# name -> (S, T, n, trials, per-n series)
RECIPES: dict[str, tuple[str, str, int, int, bool]] = {
    "lochs": ("decimal", "rcf", 1000, 100, False),
    "radix": ("radix:10", "binary", 1000, 100, True),
    "hang": ("decimal", "binary", 1000, 100, True),
    "golden": ("decimal", "golden", 1000, 100, True),
    "bolyai": ("decimal", "bolyai", 1000, 50, False),
    "bolyai-reverse": ("bolyai", "decimal", 1000, 50, False),
    "beta-cf": ("decimal", "beta-cf", 1000, 100, False),
}

SEED_RULE = (
    "radix S: i.i.d. uniform digits; other S: a uniform random real with n+10 "
    "i.i.d. decimal digits (more appended until its first n S-digits are fixed "
    "by the decimal cylinder), expanded under S"
)


@dataclass
class ExperimentConfig:
    experiment: str = "custom"
    map_s: str = "decimal"
    map_t: str = "rcf"
    n: int = 1000
    trials: int = 100
    seed: int = 20240101
    precision_bits: int | None = None
    series: bool = False
    jobs: int = 1
    out: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be >= 1")
        make_map(self.map_s)
        make_map(self.map_t)
        if self.precision_bits is not None and self.precision_bits < 64:
            raise ValueError("precision_bits must be >= 64")
        if self.format not in ("json", "csv", "text"):
            raise ValueError(f"unknown format {self.format!r}")

    @classmethod
    def for_experiment(cls, name: str, **overrides) -> "ExperimentConfig":
        if name not in RECIPES:
            raise ValueError(f"unknown experiment {name!r}; choose from {sorted(RECIPES)}")
        s, t, n, trials, series = RECIPES[name]
        base = dict(experiment=name, map_s=s, map_t=t, n=n, trials=trials, series=series)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = {k.replace("-", "_"): v for k, v in data.items()}
        extra = set(data) - {f.name for f in dataclasses.fields(cls)}
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        name = data.pop("experiment", "custom")
        if name in RECIPES:
            return cls.for_experiment(name, **data)
        return cls(experiment=name, **data)

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        # output plumbing does not affect results
        for k in ("jobs", "out", "format"):
            d.pop(k)
        return d

    def policy(self, mapS: FibredMap, width=None) -> PrecisionPolicy:
        if self.precision_bits is not None:
            return PrecisionPolicy.for_bits(self.precision_bits)
        return policy_for(mapS, self.n, width)


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------


def trial_streams(master_seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(master_seed).spawn(trials)]


def trial_stream(master_seed: int, index: int) -> np.random.Generator:
    # spawn(i + 1)[i] equals spawn(trials)[i]: children depend only on their index
    child = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(child))


def random_seed_digits(mapS: FibredMap, n: int, rng: np.random.Generator,
                       policy: PrecisionPolicy | None = None) -> tuple:
    """n S-digits of a random point.

    Radix S: i.i.d. uniform digits.  Otherwise a random real is drawn as n+10
    uniform decimal digits and expanded under S; the digits returned are
    those shared by the whole decimal cylinder, so they are the digits of the
    random real itself.  If fewer than n are fixed, further decimals are drawn.
    """
    if isinstance(mapS, RadixMap):
        return tuple(int(d) for d in rng.integers(0, mapS.g, size=n))
    decimals = [int(d) for d in rng.integers(0, 10, size=n + 10)]
    while True:
        k = int("".join(map(str, decimals)))
        den = 10 ** len(decimals)
        pol = policy or PrecisionPolicy.for_cylinder(len(decimals), 10)
        res = determined_digits((Fraction(k, den), Fraction(k + 1, den)), mapS, cap=n, policy=pol)
        if res.m >= n:
            return res.digits[:n]
        decimals.extend(int(d) for d in rng.integers(0, 10, size=max(10, len(decimals) // 2)))


# ---------------------------------------------------------------------------
# Trials
# ---------------------------------------------------------------------------


def run_trial(config: ExperimentConfig, index: int) -> dict:
    """One trial: seed digits, agreement count, and per-trial checks."""
    mapS, mapT = make_map(config.map_s), make_map(config.map_t)
    rec = {
        "index": index,
        "seed": f"{config.seed}/{index}",
        "m": None,
        "ratio": None,
        "status": None,
        "ell": None,
        "jumps": None,
        "hangs": None,
        "steps": None,
        "violations": None,
        "error": None,
    }
    try:
        rng = trial_stream(config.seed, index)
        digits = random_seed_digits(mapS, config.n, rng)
        g = mapS.g if isinstance(mapS, RadixMap) else None
        h = mapT.g if isinstance(mapT, RadixMap) else None
        violations = {}
        if config.series:
            pol = PrecisionPolicy.for_bits(config.precision_bits) if config.precision_bits else None
            ser = m_series(mapS, digits, mapT, pol)
            m, status = ser.final, ser.final_status
            js = jump_times(ser)
            rec["jumps"] = js.count
            rec["hangs"] = sum(a == b for a, b in zip(ser.m, ser.m[1:]))
            rec["steps"] = ser.n - 1
            if g and h:
                violations["jump_bound"] = len(jump_bound_violations(ser))
                violations["sandwich"] = len(sandwich_violations(ser))
                types = [t for t in js.types if t is not None]
                rec["type2_jumps"] = sum(t is HitType.TYPE2 for t in types)
            if g and isinstance(mapT, PseudoGoldenMap) and mapT.k == 2:
                violations["golden_jump"] = len(golden_jump_violations(ser, g))
        else:
            cyl = mapS.cylinder(digits)
            width = cyl.width() if not isinstance(mapS, BolyaiMap) else None
            res = determined_digits((cyl.left, cyl.right), mapT, policy=config.policy(mapS, width))
            m, status = res.m, res.status
        if g and h:
            rec["ell"] = ell(config.n, g, h)
            violations.setdefault("sandwich", int(m > rec["ell"]))
        rec["m"] = m
        rec["ratio"] = m / config.n
        rec["status"] = status.value
        rec["violations"] = violations or None
    except Exception as exc:  # recorded per trial, never fatal for the run
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


def _run_trial_args(args):
    return run_trial(*args)


def trial_ok(rec: dict) -> bool:
    return rec["error"] is None and rec["status"] == Status.SEPARATED.value


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class ExperimentReport:
    config: dict
    trials: list[dict]
    aggregates: dict
    metadata: dict = field(default_factory=dict)

    @property
    def failures(self) -> int:
        return sum(not trial_ok(r) for r in self.trials)

    @property
    def failure_rate(self) -> float:
        return self.failures / len(self.trials) if self.trials else 1.0

    def to_dict(self) -> dict:
        return {"config": self.config, "metadata": self.metadata, "trials": self.trials, "aggregates": self.aggregates}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        d = json.loads(text)
        return cls(d["config"], d["trials"], d["aggregates"], d.get("metadata", {}))

    def to_csv(self) -> str:
        cols = ["index", "seed", "m", "ratio", "status", "ell", "jumps", "hangs", "steps", "error"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.trials:
            w.writerow(["" if r.get(c) is None else (repr(r[c]) if isinstance(r[c], float) else r[c]) for c in cols])
        return buf.getvalue()

    def to_text(self) -> str:
        a = self.aggregates
        lines = [
            f"experiment  {self.config['experiment']}: S={self.config['map_s']} T={self.config['map_t']} "
            f"n={self.config['n']} trials={self.config['trials']} seed={self.config['seed']}",
            f"ok trials   {a['ok_trials']} (failures {a['failures']})",
        ]
        if a.get("mean_m") is not None:
            lines.append(f"mean m      {a['mean_m']:.3f}  (std {a['std_m']:.3f}, se {a['se_m']:.3f})")
            lines.append(f"mean m/n    {a['mean_ratio']:.6f}")
        if a.get("predicted_ratio") is not None:
            lines.append(f"predicted   {a['predicted_ratio']:.6f}")
        if a.get("ell_over_n") is not None:
            lines.append(f"ell(n)/n    {a['ell_over_n']:.6f}  below bound: {a['approaches_from_below']}")
        if a.get("hang_frequency"):
            hf = a["hang_frequency"]
            lines.append(f"hang freq   {hf['value']:.5f} +- {hf['stderr']:.5f} over {hf['steps']} steps")
        if a.get("violations"):
            lines.append("violations  " + ", ".join(f"{k}={v}" for k, v in sorted(a["violations"].items())))
        est = a.get("entropy_estimate")
        if est:
            lines.append(f"entropy est {est['estimate']:.5f} +- {est['estimate_stderr']:.5f} "
                         f"(known side {est['known_side']})")
        if a.get("reference"):
            ref = a["reference"]
            lines.append(f"reference   {ref['value']} ({ref['label']})")
        conv = a.get("conversions")
        if conv:
            lines.append(f"h/ratio     {conv['h_known_over_ratio']:.5f}")
            lines.append(f"ratio*h     {conv['ratio_times_h_known']:.5f}")
            lines.append(f"note        {conv['caveat']}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return {"json": self.to_json, "csv": self.to_csv, "text": self.to_text}[fmt]()


def aggregate(config: ExperimentConfig, trials: Sequence[dict]) -> dict:
    """Aggregates computed only from the per-trial records."""
    ok = [r for r in trials if trial_ok(r)]
    ms = [r["m"] for r in ok]
    ratios = [r["ratio"] for r in ok]
    out: dict = {"ok_trials": len(ok), "failures": len(trials) - len(ok)}
    if ms:
        out["mean_m"] = statistics.fmean(ms)
        out["std_m"] = statistics.stdev(ms) if len(ms) > 1 else 0.0
        out["se_m"] = out["std_m"] / math.sqrt(len(ms))
        out["mean_ratio"] = statistics.fmean(ratios)
        out["std_ratio"] = statistics.stdev(ratios) if len(ratios) > 1 else 0.0
    mapS, mapT = make_map(config.map_s), make_map(config.map_t)
    known_s = known_t = None
    try:
        known_s = entropy_constant(mapS)
    except UnknownEntropy:
        pass
    try:
        known_t = entropy_constant(mapT)
    except UnknownEntropy:
        pass
    if known_s and known_t:
        out["predicted_ratio"] = float(lochs_ratio(mapS, mapT).value)
    elif ratios and (known_s or known_t):
        side, h = ("S", known_s) if known_s else ("T", known_t)
        try:
            out["entropy_estimate"] = estimate_entropy(ratios, side, float(h.value)).to_dict()
        except DegenerateSample as exc:
            out["entropy_estimate"] = {"error": str(exc)}
        if isinstance(mapS, BolyaiMap) or isinstance(mapT, BolyaiMap):
            out["reference"] = BOLYAI_REFERENCE.to_dict(10)
        if isinstance(mapS, BetaCFMap) or isinstance(mapT, BetaCFMap):
            out["conversions"] = dual_conversions(out["mean_ratio"], float(h.value))
    if ok and ok[0]["ell"] is not None:
        out["ell_over_n"] = ok[0]["ell"] / config.n
        out["approaches_from_below"] = all(r["m"] <= r["ell"] for r in ok)
    if ok and ok[0]["steps"] is not None:
        hangs = sum(r["hangs"] for r in ok)
        steps = sum(r["steps"] for r in ok)
        p = hangs / steps if steps else 0.0
        out["hang_frequency"] = {
            "value": p, "stderr": math.sqrt(p * (1 - p) / steps) if steps else 0.0,
            "count": hangs, "steps": steps,
        }
        out["jumps_total"] = sum(r["jumps"] for r in ok)
    viols: dict[str, int] = {}
    for r in ok:
        for k, v in (r["violations"] or {}).items():
            viols[k] = viols.get(k, 0) + v
    if viols:
        out["violations"] = viols
    return out


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every trial (in parallel when ``config.jobs > 1``) and aggregate."""
    args = [(config, i) for i in range(config.trials)]
    if config.jobs > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            trials = list(pool.map(_run_trial_args, args, chunksize=max(1, config.trials // (4 * config.jobs))))
    else:
        trials = [run_trial(*a) for a in args]
    metadata = {
        "package_version": __version__,
        "prng": "numpy PCG64, SeedSequence(seed, spawn_key=(trial,))",
        "seed_rule": SEED_RULE,
    }
    return ExperimentReport(config.echo(), trials, aggregate(config, trials), metadata)


# ---------------------------------------------------------------------------
# Radix matrix
# ---------------------------------------------------------------------------


@dataclass
class RatioTable:
    bases: list[int]
    cells: dict[tuple[int, int], dict]

    def to_text(self) -> str:
        width = 17
        head = "g \\ h".ljust(6) + "".join(str(h).center(width) for h in self.bases)
        lines = [head, " " * 6 + "".join("pred | observed".center(width) for _ in self.bases)]
        for g in self.bases:
            row = str(g).ljust(6)
            for h in self.bases:
                c = self.cells.get((g, h))
                row += ("-" if c is None else f"{c['predicted']:.3f} | {c['observed']:.3f}").center(width)
            lines.append(row)
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["g", "h", "predicted", "observed", "std", "ell_over_n", "below_bound"])
        for (g, h), c in sorted(self.cells.items()):
            w.writerow([g, h, repr(c["predicted"]), repr(c["observed"]), repr(c["std"]), repr(c["ell_over_n"]),
                        c["below_bound"]])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"bases": self.bases, "cells": [{"g": g, "h": h, **c} for (g, h), c in sorted(self.cells.items())]}


def table(bases: Iterable[int], n: int = 1000, trials: int = 100, seed: int = 20240101, jobs: int = 1,
          series: bool = False) -> RatioTable:
    """Predicted vs observed m/n for every ordered pair of distinct radix bases."""
    bases = list(bases)
    cells = {}
    for g in bases:
        for h in bases:
            if g == h:
                continue
            cfg = ExperimentConfig(experiment="radix", map_s=f"radix:{g}", map_t=f"radix:{h}", n=n, trials=trials,
                                   seed=seed, series=series, jobs=jobs)
            rep = run_experiment(cfg)
            a = rep.aggregates
            cells[(g, h)] = {
                "predicted": a["predicted_ratio"],
                "observed": a.get("mean_ratio", float("nan")),
                "std": a.get("std_ratio", float("nan")),
                "ell_over_n": a["ell_over_n"],
                "below_bound": a.get("approaches_from_below", False),
                "failures": a["failures"],
            }
    return RatioTable(bases, cells)


# ---------------------------------------------------------------------------
# pi
# ---------------------------------------------------------------------------

PI_PREFIX = "141592653589793238462643383279"
PI_SHA256 = "f65e9355c05c93dd39b45938eb6332285145ee752200a45d8ef2c5541f14be88"


class MalformedDigitFile(ValueError):
    pass


def default_pi_file() -> Path:
    return Path(str(resources.files("correctdigits") / "data" / "pi_digits.txt"))


def parse_pi_digits(text: str) -> str:
    """Decimals of pi from text: optional leading '3.', non-digits ignored."""
    body = text.lstrip()
    if body.startswith("3."):
        body = body[2:]
    digits = "".join(ch for ch in body if ch.isdigit())
    if not digits.startswith(PI_PREFIX):
        raise MalformedDigitFile("file does not start with the decimals of pi")
    return digits


def load_pi_digits(path: str | Path | None = None) -> str:
    path = Path(path) if path is not None else default_pi_file()
    try:
        text = path.read_text()
    except OSError as exc:
        raise MalformedDigitFile(str(exc)) from exc
    return parse_pi_digits(text)


def pi_checksum(digits: str) -> str:
    return hashlib.sha256(digits.encode()).hexdigest()


def pi_demo(digits_file: str | Path | None = None, count: int = 1000) -> AgreementResult:
    """RCF digits of pi fixed by its first ``count`` decimals."""
    digits = load_pi_digits(digits_file)
    if count < 1 or count > len(digits):
        raise MalformedDigitFile(f"need {count} decimals, file has {len(digits)}")
    k = int(digits[:count])
    den = 10 ** count
    return determined_digits((Fraction(k, den), Fraction(k + 1, den)), RCFMap())


# ---------------------------------------------------------------------------
# Hanging statistics
# ---------------------------------------------------------------------------


def hangstats(g: int = 10, h: int = 2, n: int = 1000, trials: int = 100, seed: int = 20240101) -> dict:
    """Per-step hang frequency, hanging-time histogram, jump-bound check and hit types."""
    mapS, mapT = RadixMap(g), RadixMap(h)
    series: list[MSeries] = []
    for i in range(trials):
        digits = random_seed_digits(mapS, n, trial_stream(seed, i))
        series.append(m_series(mapS, digits, mapT))
    freq = hang_frequency(series, g)
    hist: dict[int, int] = {}
    hangs: list[int] = []
    types = {"TYPE1": 0, "TYPE2": 0}
    violations = 0
    for s in series:
        js = jump_times(s)
        hangs.extend(js.hangs)
        for v in js.hangs:
            hist[v] = hist.get(v, 0) + 1
        for t in js.types:
            if t is not None:
                types[t.value] += 1
        violations += len(jump_bound_violations(s))
    mean_v = statistics.fmean(hangs) if hangs else float("nan")
    se_v = statistics.stdev(hangs) / math.sqrt(len(hangs)) if len(hangs) > 1 else float("nan")
    return {
        "g": g, "h": h, "n": n, "trials": trials, "seed": seed,
        "hang_frequency": freq.value, "hang_stderr": freq.stderr, "steps": freq.steps,
        "predicted_hang_frequency": 1 / g,
        "hanging_time_histogram": {str(k): hist[k] for k in sorted(hist)},
        "mean_hanging_time": mean_v,
        "mean_hanging_time_stderr": se_v,
        "hit_types": types,
        "jump_bound_violations": violations,
    }


def constants_report() -> list[dict]:
    """Known entropy constants, the reference Bolyai value and the decimal/RCF ratio."""
    out = []
    for spec in ("rcf", "decimal", "binary", "radix:7", "luroth", "alt-luroth", "golden", "pseudo-golden:3"):
        fmap = make_map(spec)
        out.append({"map": spec, **entropy_constant(fmap).to_dict()})
    out.append({"map": "bolyai", **BOLYAI_REFERENCE.to_dict(10)})
    out.append({"map": "decimal/rcf", **lochs_ratio(make_map("decimal"), make_map("rcf")).to_dict()})
    return out
