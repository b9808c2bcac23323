"""``gentleq <kind> --config FILE [overrides] [--check]``.

Exit codes: 0 success, 1 config error, 2 I/O error, 3 bound violated under --check.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .errors import ConfigInvalid

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_CHECK = 0, 1, 2, 3


def _num_or_list(cast):
    def parse(text: str):
        parts = [p for p in text.split(",") if p.strip()]
        vals = [cast(p) for p in parts]
        return vals[0] if len(vals) == 1 else vals

    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gentleq", description="Seeded simulations of gentle quantum measurements.")
    p.add_argument("kind", choices=harness.KINDS)
    p.add_argument("--config", help="JSON config file; flags below override its fields")
    p.add_argument("--alpha", type=_num_or_list(float), help="gentleness, or a comma-separated grid")
    p.add_argument("--n", type=_num_or_list(int), help="copies, or a comma-separated grid")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--format", choices=harness.FORMATS)
    p.add_argument("--threads", type=int, help="worker threads (capped by GENTLEQ_THREADS)")
    p.add_argument("--check", action="store_true", help="exit 3 when a summary fails its bound")
    return p


def load_config(args) -> harness.ExperimentConfig:
    data = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigInvalid({"config": "must be a JSON object"})
        if data.get("kind", args.kind) != args.kind:
            raise ConfigInvalid({"kind": f"config says {data['kind']!r}, command line says {args.kind!r}"})
    data["kind"] = args.kind
    for name, key in (("alpha", "alpha"), ("n", "n"), ("epsilon", "epsilon"), ("reps", "reps"), ("seed", "seed"), ("out", "out_path"), ("format", "format")):
        v = getattr(args, name)
        if v is None:
            continue
        if key == "out_path":
            data.pop("out", None)
        data[key] = v
    return harness.ExperimentConfig.from_dict(data).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigInvalid as exc:
        for name, msg in exc.errors.items():
            print(f"config error: {name}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (json.JSONDecodeError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    result = harness.run_experiment(cfg, threads=args.threads)
    try:
        if cfg.out_path:
            harness.write_records(result.records, result.summary, cfg.out_path, cfg.format)
        elif cfg.format == "csv":
            sys.stdout.write(harness.records_to_csv(result.records))
        else:
            doc = {"records": [vars(r) for r in result.records], "summary": result.summary}
            sys.stdout.write(harness.summary_to_json(doc))
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO

    if cfg.out_path:
        print(json.dumps(harness._json_safe(result.summary), indent=2), file=sys.stderr)
    if args.check and not result.summary["pass"]:
        print("bound check failed", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
