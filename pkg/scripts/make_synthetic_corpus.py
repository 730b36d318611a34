#!/usr/bin/env python
"""Generate a synthetic corpus (WAV + alignments + manifest + ratings).

Example:
    python scripts/make_synthetic_corpus.py --out /tmp/corpus --speakers 8 --seed 0
"""

import argparse

from phoneclass.synthdata import make_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--speakers", type=int, default=8)
    parser.add_argument("--utterances", type=int, default=2, help="utterances per speaker")
    parser.add_argument("--segments", type=int, default=10, help="phone segments per utterance")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--unrated", type=int, default=0, help="trailing speakers left out of ratings.csv")
    args = parser.parse_args()
    manifest = make_corpus(
        args.out,
        n_speakers=args.speakers,
        utterances_per_speaker=args.utterances,
        segments_per_utterance=args.segments,
        seed=args.seed,
        n_unrated_speakers=args.unrated,
    )
    print(f"wrote {manifest}")


if __name__ == "__main__":
    main()
