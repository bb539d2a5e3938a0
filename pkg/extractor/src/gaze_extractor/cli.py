"""CLI for the offline embedding extractor."""

from __future__ import annotations

import argparse
import sys

from .extract import ExtractorConfig, extract, extract_zero


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaze-extract")
    parser.add_argument("command", choices=["extract"], nargs="?", default="extract")
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--encoder", help="model name or local path")
    parser.add_argument("--layer", default="last", help='"last" or a hidden-state index')
    parser.add_argument("--batch-sentences", type=int, default=8)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--zero", action="store_true", help="write an all-zeros fixture store")
    parser.add_argument("--dim", type=int, default=8, help="vector width for --zero")
    parser.add_argument("--out", required=True)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.zero and not args.encoder:
        parser.error("--encoder is required unless --zero is given")
    try:
        if args.zero:
            extract_zero(args.corpus, args.dim, args.out)
        else:
            config = ExtractorConfig(
                encoder_name=args.encoder,
                layer=args.layer,
                batch_sentences=args.batch_sentences,
                device=args.device,
            )
            report = extract(args.corpus, config, args.out)
            flagged = len(report["zero_piece_words"]) + len(report["truncated_sentences"])
            if flagged:
                print(f"warning: {flagged} flagged event(s), see {args.out}.report.json", file=sys.stderr)
        print(f"wrote {args.out}")
        return 0
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
