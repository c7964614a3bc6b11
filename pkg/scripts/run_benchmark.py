#!/usr/bin/env python3
"""Run the full model-comparison study on a comment corpus.

Thin wrapper over the library API for interactive experimentation; the
``bullyguard benchmark`` CLI command produces the same reports. Defaults to
the bundled synthetic corpus and the study settings (5-fold CV for the
classical models, 80/10/10 split and early stopping for the neural ones,
seed 42 throughout).

Usage: python scripts/run_benchmark.py [--corpus data/comments_synthetic.csv]
       [--out-dir benchmark_out] [--seed 42] [--folds 5]
       [--keep-function-words]
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from bullyguard.corpus import load_corpus
from bullyguard.eval import (
    BenchmarkConfig,
    benchmark_to_dict,
    render_benchmark_tables,
    run_benchmark,
)
from bullyguard.preprocess import load_default_lexicon, load_default_stemmer_rules


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--corpus", default="data/comments_synthetic.csv")
    parser.add_argument("--out-dir", default="benchmark_out")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--folds", type=int, default=5)
    parser.add_argument("--keep-function-words", action="store_true",
                        help="skip stopword removal and stemming for the neural track")
    args = parser.parse_args()

    records = load_corpus(args.corpus)
    config = BenchmarkConfig(
        folds=args.folds,
        seed=args.seed,
        neural_keep_function_words=args.keep_function_words,
    )
    report = run_benchmark(
        records, config, load_default_lexicon(), load_default_stemmer_rules(),
    )
    tables = render_benchmark_tables(report)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "benchmark_tables.txt").write_text(tables, encoding="utf-8")
    (out_dir / "benchmark_report.json").write_text(
        json.dumps(benchmark_to_dict(report), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    print(tables)
    print(f"finished in {report.elapsed_seconds:.1f}s; reports in {out_dir}",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
