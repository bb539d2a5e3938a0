"""Single executable exposing the full pipeline.

Subcommands: import-embeddings, features, train, predict, evaluate, ablate,
baseline. Exit status 0 on success, 1 on validation errors (single-line
``error:`` message), 2 on usage errors. Declared outputs are written
atomically (temp file + rename), so a failed run leaves no partial files.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
from pathlib import Path

from . import ablation, evaluation, models, store as store_mod, training
from .corpus import HEADER, group_sentences, parse_corpus
from .errors import GazeError, MissingEmbedding
from .features import featurize_sentence


def atomic_write(path: str | Path, data: bytes | str) -> None:
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_store(args) -> store_mod.EmbeddingStore:
    return store_mod.read_store(args.emb)


def _model_name(model) -> str:
    if isinstance(model, models.MedianBaseline):
        return "median"
    if isinstance(model, models.LinearModel):
        return "linear"
    return "mlp" if model.dim == 0 else "fusion"


def cmd_import_embeddings(args) -> int:
    corpus = parse_corpus(args.corpus, args.split)
    if args.zero:
        st = store_mod.zero_store(corpus, args.dim)
    else:
        st = store_mod.read_store(args.src)
        for record in corpus.records:
            if record.key not in st.entries:
                raise MissingEmbedding(f"store does not cover {record.key!r}")
    atomic_write(args.out, store_mod.store_to_bytes(st.entries, st.dim, st.dataset_names))
    print(f"wrote {args.out}: {len(st)} entries, dim {st.dim}")
    return 0


def cmd_features(args) -> int:
    corpus = parse_corpus(args.data, args.split)
    st = _load_store(args)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(
        ["dataset", "language", "sentence_id", "word_id", "word", "tok_len", "word_char_len", "rel_len"]
    )
    rows = {}
    for group in group_sentences(corpus):
        for record, fv in zip(group, featurize_sentence(group, st)):
            rows[record.key] = (record, fv)
    for record in corpus.records:
        r, fv = rows[record.key]
        writer.writerow(
            [r.dataset, r.language, r.sentence_id, r.word_id, r.word,
             fv.tok_len, fv.word_char_len, repr(fv.rel_len)]
        )
    atomic_write(args.out, buf.getvalue())
    print(f"wrote {args.out}: {len(corpus)} rows")
    return 0


def cmd_train(args) -> int:
    train_corpus = parse_corpus(args.train, "train")
    dev_corpus = parse_corpus(args.dev, "dev")
    st = _load_store(args)
    if args.config:
        hp = training.load_config(args.config, seed=args.seed)
    else:
        hp = training.HyperParams(seed=args.seed)
    model, log = training.train(train_corpus, dev_corpus, st, hp)
    atomic_write(args.out, models.model_to_bytes(model))
    if args.log:
        atomic_write(args.log, "\n".join(training.train_log_lines(log)) + "\n")
    if log:
        best = min(log, key=lambda e: e.dev_report.overall)
        print(f"wrote {args.out}; best dev overall MAE {best.dev_report.overall!r} at epoch {best.epoch}")
    else:
        print(f"wrote {args.out} (no training epochs)")
    return 0


def cmd_predict(args) -> int:
    corpus = parse_corpus(args.data, args.split)
    st = _load_store(args)
    model = models.load_model(args.model)
    mask = ablation.AblationMask.parse(args.mask) if args.mask else None
    preds = models.predict(model, corpus, st, mask=mask)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(HEADER)
    for record, row in zip(corpus.records, preds):
        writer.writerow(
            [record.dataset, record.language, record.sentence_id, record.word_id, record.word]
            + [repr(float(v)) for v in row]
        )
    atomic_write(args.out, buf.getvalue())
    print(f"wrote {args.out}: {len(corpus)} predictions")
    return 0


def cmd_evaluate(args) -> int:
    corpus = parse_corpus(args.data, args.split)
    st = _load_store(args)
    model = models.load_model(args.model)
    preds = models.predict(model, corpus, st)
    reports = evaluation.evaluate_sliced(preds, corpus)
    name = args.name or _model_name(model)
    if args.format == "table":
        sys.stdout.write(evaluation.emit_results_table([(name, {args.split: reports[0]})]))
    else:
        sys.stdout.write(
            "\n".join(evaluation.eval_csv_lines([(name, args.split, r) for r in reports])) + "\n"
        )
    if args.out:
        lines = evaluation.eval_csv_lines([(name, args.split, r) for r in reports])
        atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_ablate(args) -> int:
    corpus = parse_corpus(args.data, args.split)
    st = _load_store(args)
    model = models.load_model(args.model)
    if not isinstance(model, models.FusionModel):
        raise GazeError("ablation requires a fusion (or mlp) model checkpoint")
    baseline_preds = models.predict(model, corpus, st)
    baseline_report = evaluation.evaluate_sliced(baseline_preds, corpus)[0]
    rows = [(ablation.AblationMask(), baseline_report)]
    rows += ablation.ablation_sweep(model, corpus, st)
    lines = ["mask,ffd_avg,ffd_std,trt_avg,trt_std,overall"]
    for mask, report in rows:
        lines.append(
            ",".join([mask.render()] + [repr(v) for v in (*report.per_target, report.overall)])
        )
    if args.format == "table":
        table_rows = [(mask.render(), {args.split: report}) for mask, report in rows]
        sys.stdout.write(evaluation.emit_results_table(table_rows))
    else:
        sys.stdout.write("\n".join(lines) + "\n")
    atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_baseline(args) -> int:
    train_corpus = parse_corpus(args.train, "train")
    st = _load_store(args)
    if args.kind == "median":
        model = models.fit_median(train_corpus)
    elif args.kind == "linear":
        model = models.fit_linear(train_corpus, st, ridge_lambda=args.ridge_lambda)
    else:
        dev_corpus = parse_corpus(args.dev, "dev")
        if args.config:
            hp = training.load_config(args.config, seed=args.seed)
        else:
            hp = training.HyperParams(seed=args.seed)
        model, _ = training.train(train_corpus, dev_corpus, st, hp, features_only=True)
    atomic_write(args.out, models.model_to_bytes(model))
    if args.dev:
        dev_corpus = parse_corpus(args.dev, "dev")
        preds = models.predict(model, dev_corpus, st)
        report = evaluation.evaluate_sliced(preds, dev_corpus)[0]
        sys.stdout.write(evaluation.emit_results_table([(args.kind, {"dev": report})]))
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazefusion")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import-embeddings", help="validate / canonicalize an embedding store")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.add_argument("--emb", dest="src", help="source store to validate against the corpus")
    p.add_argument("--zero", action="store_true", help="build an all-zeros fixture store")
    p.add_argument("--dim", type=int, default=8, help="vector width for --zero")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_import_embeddings)

    p = sub.add_parser("features", help="dump computed features as CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.add_argument("--emb", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train the fusion model")
    p.add_argument("--train", required=True)
    p.add_argument("--dev", required=True)
    p.add_argument("--emb", required=True)
    p.add_argument("--config", help="flat key = value hyperparameter file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="TrainLog CSV path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write per-token predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="test")
    p.add_argument("--emb", required=True)
    p.add_argument("--mask", help="feature names to zero, e.g. tok_len,rel_len")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="MAE report against gold targets")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="dev")
    p.add_argument("--emb", required=True)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--name", help="model name for the report")
    p.add_argument("--out", help="machine-readable CSV path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="zero-replacement feature ablation sweep")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("train", "dev", "test"), default="dev")
    p.add_argument("--emb", required=True)
    p.add_argument("--format", choices=("table", "csv"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("baseline", help="fit a baseline model")
    p.add_argument("--kind", choices=("median", "linear", "mlp"), required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--dev", help="required for mlp; enables a dev report otherwise")
    p.add_argument("--emb", required=True)
    p.add_argument("--ridge-lambda", type=float, default=0.0)
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "import-embeddings" and not (args.zero or args.src):
        parser.error("import-embeddings needs --emb or --zero")
    if args.command == "baseline" and args.kind == "mlp" and not args.dev:
        parser.error("baseline --kind mlp needs --dev")
    try:
        return args.func(args)
    except GazeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
