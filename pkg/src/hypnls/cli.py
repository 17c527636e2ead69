"""Command-line driver.

Usage::

    hypnls run EXPERIMENT [--config PATH] [--out DIR] [--seed N] [--set KEY=VALUE ...]
    hypnls sweep EXPERIMENT --axis NAME --values V1,V2,... [--threads N] [...]
    hypnls list

The output directory defaults to ``$HYPNLS_OUT`` and then ``./hypnls_out``.
The exit status is 1 when a gated row fails and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import ConfigurationError
from .experiments import EXPERIMENTS, SWEEP_AXES, ExperimentConfig, default_options, load_config, run, sweep

log = logging.getLogger("hypnls")

ENV_OUT = "HYPNLS_OUT"


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _build_config(args) -> ExperimentConfig:
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}", "set")
        key, val = item.split("=", 1)
        if key.startswith("options."):
            overrides.setdefault("options", {})[key[len("options."):]] = _parse_value(val)
        else:
            overrides[key] = _parse_value(val)
    if args.seed is not None:
        overrides["seed"] = args.seed
    overrides["output_dir"] = args.out or os.environ.get(ENV_OUT) or "hypnls_out"
    if args.config:
        base = load_config(args.config, args.experiment)
        flat = base.to_flat()
        opts = dict(flat.pop("options"))
        opts.update(overrides.pop("options", {}))
        flat.update(overrides)
        flat["options"] = opts
        return ExperimentConfig.preset(args.experiment, **flat)
    return ExperimentConfig.preset(args.experiment, **overrides)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hypnls", description="Radial NLS experiments on hyperbolic space.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("experiment", choices=EXPERIMENTS)
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./hypnls_out)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a configuration key, e.g. sigma=0.3 or options.data=zero")

    common(sub.add_parser("run", help="run one experiment"))
    sw = sub.add_parser("sweep", help="run one experiment over a list of values")
    common(sw)
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--values", required=True, help="comma separated values")
    ls = sub.add_parser("list", help="list experiments and their default options")
    ls.add_argument("experiment", nargs="?", choices=EXPERIMENTS)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "list":
        for name in [args.experiment] if args.experiment else EXPERIMENTS:
            cfg = ExperimentConfig.preset(name)
            print(f"{name}: {json.dumps(dict(cfg.to_flat(), options=default_options(name)), sort_keys=True)}")
        return 0
    try:
        cfg = _build_config(args)
        if args.command == "sweep":
            values = [_parse_value(v) for v in args.values.split(",") if v.strip()]
            rep = sweep(cfg, args.axis, values, threads=args.threads)
        else:
            rep = run(cfg)
    except ConfigurationError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(rep.to_csv())
    for row in rep.failed:
        log.warning("FAILED %s/%s = %r (%s%r)", row.experiment, row.quantity, row.value, row.op, row.tolerance)
    return 0 if rep.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
