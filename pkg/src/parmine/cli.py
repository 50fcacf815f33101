"""Command-line entry point.

Every subcommand takes --config pointing at a JSON pipeline configuration;
any field can be overridden with flat dotted flags, e.g.:

    parmine mine-all --config run.json --mining.k=5 --output_dir=out2

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import pipeline, evalrun
from .config import load_config, parse_overrides
from .corpus import corpus_stats, ingest_corpus
from .errors import ConfigError, DataError, ProviderError

SUBCOMMANDS = (
    "ingest", "windows", "embed", "mine", "cluster", "align", "export",
    "mine-all", "eval", "audit-sample", "audit-report", "stats",
)


def _diag(kind: str, message: str) -> None:
    # one-line machine-parseable reason on stderr
    first = str(message).splitlines()[0] if str(message) else ""
    print(f"error\t{kind}\t{first}", file=sys.stderr)


def _emit(obj) -> None:
    print(json.dumps(obj, ensure_ascii=False, sort_keys=True))


def run(argv: list[str]) -> int:
    parser = argparse.ArgumentParser(prog="parmine", description=__doc__)
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--labels", help="filled audit TSV (audit-report)")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker thread cap (0 = all cores)")
    args, extra = parser.parse_known_args(argv)

    overrides = parse_overrides(extra)
    if args.threads is not None:
        overrides["threads"] = args.threads
    cfg = load_config(args.config, overrides)

    sub = args.subcommand
    if sub == "ingest":
        _emit({"ingested": pipeline.stage_ingest(cfg)})
    elif sub == "windows":
        _emit({"windows": pipeline.stage_windows(cfg)})
    elif sub == "embed":
        _emit({"embedded": pipeline.stage_embed(cfg)})
    elif sub == "mine":
        _emit({"pairs": pipeline.stage_mine(cfg)})
    elif sub == "cluster":
        _emit({"clusters": pipeline.stage_cluster(cfg)})
    elif sub == "align":
        _emit({"alignment_runs": pipeline.stage_align(cfg)})
    elif sub == "export":
        _emit({"exported_pairs": pipeline.stage_export(cfg)})
    elif sub == "mine-all":
        _emit(pipeline.mine_all(cfg))
    elif sub == "eval":
        rows = evalrun.run_eval(cfg)
        for name, strategy, row in rows:
            print(f"{name}\t{strategy}\t{row}")
    elif sub == "audit-sample":
        print(evalrun.run_audit_sample(cfg))
    elif sub == "audit-report":
        if not args.labels:
            raise ConfigError("audit-report requires --labels")
        rates = evalrun.run_audit_report(cfg, args.labels)
        _emit(rates)
    elif sub == "stats":
        report = {}
        for lang in sorted(cfg["corpora"]):
            store = ingest_corpus(cfg["corpora"][lang], lang)
            report[lang] = corpus_stats(store)
        _emit(report)
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(argv)
    except ConfigError as e:
        _diag("config", str(e))
        return 1
    except DataError as e:
        _diag("data", str(e))
        return 2
    except ProviderError as e:
        _diag("provider", str(e))
        return 3
    except FileNotFoundError as e:
        _diag("data", str(e))
        return 2


if __name__ == "__main__":
    sys.exit(main())
