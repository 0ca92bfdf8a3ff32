"""Command-line entry points.

Exit codes: 0 success, 2 input error, 3 config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from . import checkpoint, synth
from .entailment import entail_reward, load_nli, save_nli, train_entailment
from .metrics import SaliencyWeights, rouge_l, rouge_n, rouge_sal
from .saliency import load_spans, save_spans, train_saliency
from .text import (CorpusError, DocumentSummaryPair, load_corpus, load_jsonl, split_sentences,
                   write_jsonl)
from .trainer import (ConfigError, TrainConfig, decode_corpus, parse_reward_spec,
                      score_summaries, train)

log = logging.getLogger("multireward")

INPUT_ERROR, CONFIG_ERROR = 2, 3


class InputError(Exception):
    pass


def _fmt(v, digits: int = 6) -> str:
    return f"{v:.{digits}f}" if isinstance(v, float) else str(v)


def _csv(rows, header, digits: int = 6) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v, digits) for v in row])
    return buf.getvalue()


def _load_refs(path, need_document=False) -> dict[str, DocumentSummaryPair]:
    fields = ("id", "document", "summary") if need_document else ("id", "summary")
    refs = {}
    for rec in load_jsonl(path, fields):
        summary = split_sentences(rec["summary"])
        document = split_sentences(rec.get("document", "")) or summary
        refs[str(rec["id"])] = DocumentSummaryPair(str(rec["id"]), document, summary)
    return refs


def _load_cands(path) -> dict[str, list[list[str]]]:
    return {str(r["id"]): split_sentences(r["summary"])
            for r in load_jsonl(path, ("id", "summary"))}


def _align(refs: dict, cands: dict, label: str) -> list[str]:
    missing = [i for i in refs if i not in cands]
    extra = [i for i in cands if i not in refs]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"{label} is missing ids: {', '.join(missing)}")
        if extra:
            parts.append(f"{label} has unknown ids: {', '.join(extra)}")
        raise InputError("; ".join(parts))
    return list(refs)


def cmd_score(args) -> str:
    refs, cands = _load_refs(args.refs), _load_cands(args.cands)
    ids = _align(refs, cands, str(args.cands))
    columns = []
    if args.rouge_l or not (args.rouge_n or args.rougesal or args.entail):
        columns.append("rougeL")
    columns += [f"rouge{n}" for n in args.rouge_n or ()]
    sidecar = {}
    if args.rougesal:
        sidecar = {str(r["id"]): SaliencyWeights.from_json(r)
                   for r in load_jsonl(args.rougesal, ("id", "weights"))}
        columns.append("rougesal")
    scorer = checkpoint.load_entailment(args.entail) if args.entail else None
    if scorer is not None:
        columns.append("entail")
    rows, sums = [], [0.0] * len(columns)
    for pid in ids:
        ref, cand = refs[pid].summary, cands[pid]
        row = []
        for col in columns:
            if col == "rougeL":
                row.append(rouge_l(ref, cand, args.beta).f)
            elif col == "rougesal":
                if pid not in sidecar:
                    raise InputError(f"weights sidecar is missing id {pid}")
                row.append(rouge_sal(ref, cand, sidecar[pid], sidecar[pid], args.beta).f)
            elif col == "entail":
                row.append(entail_reward(scorer, ref, cand))
            else:
                row.append(rouge_n(ref, cand, int(col[len("rouge"):]), args.beta).f)
        sums = [s + v for s, v in zip(sums, row)]
        rows.append([pid] + row)
    rows.append(["mean"] + [s / len(ids) for s in sums] if ids else ["mean"])
    return _csv(rows, ["id"] + columns, args.digits)


def cmd_make_synth(args) -> str:
    if args.size < 1:
        raise InputError("--size must be >= 1")
    if args.kind == "summ":
        pairs = synth.make_summ(args.size, args.seed)
        write_jsonl(args.out, (synth.pair_to_json(p) for p in pairs))
    elif args.kind == "spans":
        save_spans(args.out, synth.make_spans(args.size, args.seed))
    else:
        save_nli(args.out, synth.make_nli(args.size, args.seed))
    return ""


ANALYSIS_METRICS = ("saliency_match", "rougesal", "entail", "novel2", "novel3", "novel4")


def cmd_analyze(args) -> str:
    refs = _load_refs(args.refs, need_document=True)
    saliency = checkpoint.load_saliency(args.saliency_ckpt)
    scorer = checkpoint.load_entailment(args.entail_ckpt)
    rows = []
    for path in args.outputs:
        cands = _load_cands(path)
        ids = _align(refs, cands, str(path))
        table = score_summaries([refs[i] for i in ids], [cands[i] for i in ids], saliency,
                                scorer, ANALYSIS_METRICS, threshold=args.threshold)
        rows.append([str(path)] + [table[m] for m in ANALYSIS_METRICS])
    return _csv(rows, ("model",) + ANALYSIS_METRICS)


def cmd_train(args) -> str:
    config = TrainConfig.from_file(args.config)
    if args.reward:
        config = config.replace(reward=parse_reward_spec(args.reward))
    corpus = load_corpus(args.corpus)
    saliency = checkpoint.load_saliency(args.saliency_ckpt) if args.saliency_ckpt else None
    scorer = checkpoint.load_entailment(args.entail_ckpt) if args.entail_ckpt else None
    if config.rl_steps and "rougesal" in config.reward and saliency is None:
        raise ConfigError("reward rougesal requires --saliency-ckpt")
    if config.rl_steps and "entail" in config.reward and scorer is None:
        raise ConfigError("reward entail requires --entail-ckpt")
    init = checkpoint.load_policy(args.init) if args.init else None
    policy, report = train(corpus, config, saliency, scorer, init_policy=init)
    out = Path(args.out_dir)
    checkpoint.save_policy(policy, out / "policy", seed=config.seed)
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (out / "config.txt").write_text(config.to_text(), encoding="utf-8")
    return ""


def cmd_decode(args) -> str:
    policy = checkpoint.load_policy(args.ckpt)
    corpus = load_corpus(args.corpus)
    beam = 0 if args.greedy else args.beam
    decodes = decode_corpus(policy, corpus, beam, args.max_len)
    write_jsonl(args.out, ({"id": p.id, "summary": " ".join(t for s in d for t in s)}
                           for p, d in zip(corpus, decodes)))
    return ""


def cmd_train_saliency(args) -> str:
    tagger = train_saliency(load_spans(args.spans), epochs=args.epochs, seed=args.seed)
    checkpoint.save_saliency(tagger, args.out_dir)
    return ""


def cmd_train_entail(args) -> str:
    clf = train_entailment(load_nli(args.nli), epochs=args.epochs, seed=args.seed)
    checkpoint.save_entailment(clf, args.out_dir)
    return ""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multireward", description=__doc__.splitlines()[0])
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score candidate summaries against references")
    p.add_argument("refs", type=Path)
    p.add_argument("cands", type=Path)
    p.add_argument("--rouge-l", action="store_true")
    p.add_argument("--rouge-n", type=int, action="append", metavar="N")
    p.add_argument("--rougesal", type=Path, metavar="WEIGHTS_JSONL")
    p.add_argument("--entail", type=Path, metavar="SCORER_CKPT")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--digits", type=int, default=6, help="decimal places in the output")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("make-synth", help="write a synthetic dataset")
    p.add_argument("--kind", choices=("summ", "spans", "nli"), required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--seed", type=int, default=17)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_make_synth)

    p = sub.add_parser("analyze", help="saliency / entailment / novel n-gram report")
    p.add_argument("outputs", type=Path, nargs="+")
    p.add_argument("--refs", type=Path, required=True)
    p.add_argument("--saliency-ckpt", type=Path, required=True)
    p.add_argument("--entail-ckpt", type=Path, required=True)
    p.add_argument("--threshold", type=float, default=0.2)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("train", help="XE pretraining then RL")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--reward", help="override, e.g. rougesal+entail")
    p.add_argument("--saliency-ckpt", type=Path)
    p.add_argument("--entail-ckpt", type=Path)
    p.add_argument("--init", type=Path, help="policy checkpoint to start from")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("decode", help="decode a corpus with a policy checkpoint")
    p.add_argument("--ckpt", type=Path, required=True)
    p.add_argument("--corpus", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--beam", type=int, default=4)
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--max-len", type=int, default=20)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("train-saliency", help="fit the saliency tagger on a span dataset")
    p.add_argument("--spans", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=17)
    p.set_defaults(func=cmd_train_saliency)

    p = sub.add_parser("train-entail", help="fit the entailment classifier on NLI JSONL")
    p.add_argument("--nli", type=Path, required=True)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--seed", type=int, default=17)
    p.set_defaults(func=cmd_train_entail)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        out = args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except (InputError, CorpusError, FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    if out:
        sys.stdout.write(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
