#!/usr/bin/env python
"""End-to-end smoke run on a small synthetic corpus.

Builds the corpus, writes an experiment config, runs every stage through the
report, and prints it. Finishes in about a minute on a laptop CPU.

Example:
    python scripts/run_smoke_experiment.py --workdir /tmp/smoke
"""

import argparse
import json
from pathlib import Path

from phoneclass.experiments.cli import main as cli_main
from phoneclass.synthdata import make_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--encoder", choices=("cnn", "ssl"), default="cnn")
    args = parser.parse_args()

    workdir = Path(args.workdir)
    corpus_dir = workdir / "corpus"
    manifest = make_corpus(corpus_dir, n_speakers=6, utterances_per_speaker=2,
                           segments_per_utterance=8, seed=args.seed, n_unrated_speakers=1)

    if args.encoder == "cnn":
        encoder = {"kind": "cnn"}
    else:
        encoder = {"kind": "ssl", "backend_id": "toy:demo", "hidden_layers": 6,
                   "trainable": False, "embedding_dim": 64}

    config = {
        "run_id": f"smoke_{args.encoder}",
        "manifest_path": str(manifest),
        "ratings_path": str(corpus_dir / "ratings.csv"),
        "encoder": encoder,
        "training": {"epochs": 2, "batch_size": 64},
        "balancing": {"exclude_silence_from_minimum": True},
        "n_resamples": 200,
        "seed": args.seed,
        "out_dir": str(workdir / "runs"),
    }
    config_path = workdir / "config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")

    code = cli_main(["report", "--config", str(config_path)])
    raise SystemExit(code)


if __name__ == "__main__":
    main()
