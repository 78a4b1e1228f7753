"""Command-line entry point: ``correctdigits {run,table,pi-demo,constants,hangstats}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .harness import (
    RECIPES,
    ExperimentConfig,
    MalformedDigitFile,
    constants_report,
    hangstats,
    pi_demo,
    run_experiment,
    table,
)

log = logging.getLogger("correctdigits")

FAILURE_LIMIT = 0.10


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _config_from_args(args) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        data.update(json.loads(Path(args.config).read_text()))
    flags = {
        "experiment": args.experiment,
        "map_s": args.map_s,
        "map_t": args.map_t,
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
        "precision_bits": args.precision_bits,
        "series": args.series,
        "jobs": args.jobs,
        "out": args.out,
        "format": args.format,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def cmd_run(args) -> int:
    config = _config_from_args(args)
    log.info("running %s: S=%s T=%s n=%d trials=%d", config.experiment, config.map_s, config.map_t,
             config.n, config.trials)
    report = run_experiment(config)
    _write(report.render(config.format), config.out)
    if report.failures == len(report.trials):
        log.error("all trials failed")
        return 1
    if report.failure_rate > FAILURE_LIMIT:
        log.warning("%d of %d trials failed", report.failures, len(report.trials))
        return 2
    return 0


def cmd_table(args) -> int:
    tab = table(args.bases, n=args.n, trials=args.trials, seed=args.seed, jobs=args.jobs)
    if args.format == "csv":
        text = tab.to_csv()
    elif args.format == "json":
        text = json.dumps(tab.to_dict(), sort_keys=True, indent=2) + "\n"
    else:
        text = tab.to_text()
    _write(text, args.out)
    failures = sum(c["failures"] for c in tab.cells.values())
    total = args.trials * len(tab.cells)
    return 2 if total and failures / total > FAILURE_LIMIT else 0


def cmd_pi_demo(args) -> int:
    res = pi_demo(args.digits_file, args.count)
    out = {"count": args.count, "m": res.m, "status": res.status.value}
    if args.show_digits:
        out["digits"] = list(res.digits)
    _write(json.dumps(out, sort_keys=True) + "\n", args.out)
    return 0


def cmd_constants(args) -> int:
    _write(json.dumps(constants_report(), indent=2) + "\n", args.out)
    return 0


def cmd_hangstats(args) -> int:
    stats = hangstats(args.g, args.h, n=args.n, trials=args.trials, seed=args.seed)
    _write(json.dumps(stats, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="correctdigits", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment")
    r.add_argument("--experiment", choices=sorted(RECIPES) + ["custom"])
    r.add_argument("--map-s", help="S map, e.g. decimal, radix:7, bolyai")
    r.add_argument("--map-t", help="T map, e.g. rcf, binary, golden, beta-cf")
    r.add_argument("--n", type=int, help="S-digits per trial")
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int, help="master PRNG seed")
    r.add_argument("--precision-bits", type=int)
    r.add_argument("--series", action="store_true", default=None, help="compute m(n) for every n")
    r.add_argument("--jobs", type=int)
    r.add_argument("--out")
    r.add_argument("--format", choices=["json", "csv", "text"])
    r.add_argument("--config", help="JSON config file; flags override it")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table", help="predicted vs observed m/n for radix pairs")
    t.add_argument("--bases", type=int, nargs="+", default=[2, 7, 10])
    t.add_argument("--n", type=int, default=1000)
    t.add_argument("--trials", type=int, default=100)
    t.add_argument("--seed", type=int, default=20240101)
    t.add_argument("--jobs", type=int, default=1)
    t.add_argument("--format", choices=["json", "csv", "text"], default="text")
    t.add_argument("--out")
    t.set_defaults(func=cmd_table)

    d = sub.add_parser("pi-demo", help="RCF digits of pi fixed by its decimals")
    d.add_argument("--digits-file", help="defaults to the bundled file")
    d.add_argument("--count", type=int, default=1000)
    d.add_argument("--show-digits", action="store_true")
    d.add_argument("--out")
    d.set_defaults(func=cmd_pi_demo)

    c = sub.add_parser("constants", help="entropy constants as JSON")
    c.add_argument("--out")
    c.set_defaults(func=cmd_constants)

    h = sub.add_parser("hangstats", help="hanging-time statistics for a radix pair")
    h.add_argument("--g", type=int, default=10)
    h.add_argument("--h", type=int, default=2)
    h.add_argument("--n", type=int, default=1000)
    h.add_argument("--trials", type=int, default=100)
    h.add_argument("--seed", type=int, default=20240101)
    h.add_argument("--out")
    h.set_defaults(func=cmd_hangstats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, MalformedDigitFile, OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
