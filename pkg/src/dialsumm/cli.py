"""Command-line entry point: ``dialsumm <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import crf
from .corpus import (default_tagset, load_conversations, load_summary_examples, load_tagset,
                     save_conversations, tokenize)
from .pipeline import STANDARD_VARIANTS, PipelineConfig, run_all
from .pointer_gen import ModelConfig, PointerGenerator, beam_search_decode, build_vocab
from .pointer_gen import TrainConfig as PgenTrainConfig
from .pointer_gen import load_model as load_pgen
from .pointer_gen import save_model as save_pgen
from .pointer_gen import train as train_pgen
from .rewriter import RewriteConfig, load_rewrite_config, render_document
from .rouge import rouge_multi


def _tagset(path):
    return load_tagset(path) if path else default_tagset()


def cmd_tag_train(args):
    tagset = _tagset(args.tagset)
    train = load_conversations(args.train, tagset)
    dev = load_conversations(args.dev, tagset) if args.dev else []
    cfg = crf.TrainConfig(l2_lambda=args.l2, learning_rate=args.lr, epochs=args.epochs, seed=args.seed,
                          early_stop_patience=args.patience, batch_size=args.batch)
    model = crf.train(train, dev, cfg, tagset)
    crf.save_model(model, args.out)
    if dev:
        print(f"dev accuracy {crf.evaluate_accuracy(model, dev):.4f}")


def cmd_tag(args):
    model = crf.load_model(args.model)
    convs = load_conversations(args.inp)
    save_conversations([crf.tag_conversation(model, c) for c in convs], args.out)


def cmd_rewrite(args):
    tagset = _tagset(args.tagset)
    cfg = load_rewrite_config(args.config) if args.config else RewriteConfig()
    variant = STANDARD_VARIANTS[args.variant]
    convs = load_conversations(args.inp, tagset)
    paragraphs, provenance = [], []
    for conv in convs:
        doc = render_document(conv, tagset, cfg, variant)
        if doc.warning:
            logging.warning("conversation %s: every utterance was removed", conv.id)
        paragraphs.append(doc.text)
        provenance.append({"conv_id": conv.id,
                           "sentences": [{"text": s.text, "sources": list(s.sources)} for s in doc.sentences]})
    Path(args.out).write_text("\n\n".join(paragraphs) + "\n", encoding="utf-8")
    if args.provenance:
        Path(args.provenance).write_text(
            "".join(json.dumps(p, sort_keys=True) + "\n" for p in provenance), encoding="utf-8")


def cmd_summ_train(args):
    examples = load_summary_examples(args.data)
    pairs = [(ex.source_text, ref) for ex in examples for ref in ex.references]
    vocab = build_vocab([s for s, _ in pairs] + [t for _, t in pairs], args.vocab)
    model = PointerGenerator(vocab, ModelConfig(d_e=args.dim_e, d_h=args.dim_h,
                                                cov_weight=args.cov_weight, seed=args.seed))
    cfg = PgenTrainConfig(steps=args.steps, batch_size=args.batch, learning_rate=args.lr, seed=args.seed,
                          coverage_start=args.coverage_start, max_src_len=args.max_src_len)
    model = train_pgen(model, pairs, cfg)
    save_pgen(model, args.out)


def _paragraphs(text: str) -> list[str]:
    return [p.strip() for p in text.split("\n\n") if p.strip()]


def cmd_summarize(args):
    model = load_pgen(args.model)
    docs = _paragraphs(Path(args.inp).read_text(encoding="utf-8"))
    lines = [" ".join(beam_search_decode(model, tokenize(d), args.beam, args.max_len, args.min_len))
             for d in docs]
    Path(args.out).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def evaluate_report(cands: list[list[str]], refs: list[list[list[str]]], ns, mode: str) -> str:
    if len(cands) != len(refs):
        raise ValueError(f"{len(cands)} candidates but {len(refs)} reference records")
    lines = [f"# ROUGE, {len(cands)} summaries, multi-reference mode '{mode}', mean over summaries",
             f"{'metric':<10}{'P':>10}{'R':>10}{'F1':>10}"]
    for n in ns:
        scores = [rouge_multi(c, r, n, mode) for c, r in zip(cands, refs)]
        k = max(len(scores), 1)
        p = sum(s.precision for s in scores) / k
        r = sum(s.recall for s in scores) / k
        f = sum(s.f1 for s in scores) / k
        lines.append(f"{'ROUGE-' + str(n):<10}{p:>10.5f}{r:>10.5f}{f:>10.5f}")
    return "\n".join(lines) + "\n"


def cmd_evaluate(args):
    cands = [tokenize(line) for line in Path(args.cand).read_text(encoding="utf-8").splitlines()]
    refs = [[list(r) for r in ex.references] for ex in load_summary_examples(args.refs)]
    ns = [int(x) for x in args.n.split(",")]
    report = evaluate_report(cands, refs, ns, args.mode)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    else:
        sys.stdout.write(report)


def cmd_pipeline(args):
    report = run_all(PipelineConfig.from_file(args.config))
    sys.stdout.write(report.to_text())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dialsumm", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tag-train", help="train the dialogue-act CRF")
    p.add_argument("--train", required=True)
    p.add_argument("--dev")
    p.add_argument("--out", required=True)
    p.add_argument("--tagset", help="tag<TAB>role file (default: bundled Switchboard tags)")
    p.add_argument("--l2", type=float, default=0.1)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--batch", type=int, default=8)
    p.set_defaults(func=cmd_tag_train)

    p = sub.add_parser("tag", help="fill da_tag with CRF predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("rewrite", help="rewrite tagged conversations into paragraphs")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--tagset")
    p.add_argument("--variant", choices=sorted(STANDARD_VARIANTS), default="join-qa")
    p.add_argument("--config", help="rewrite config JSON")
    p.add_argument("--out", required=True)
    p.add_argument("--provenance", help="JSONL sidecar mapping sentences to utterance indices")
    p.set_defaults(func=cmd_rewrite)

    p = sub.add_parser("summ-train", help="train the pointer-generator")
    p.add_argument("--data", required=True, help="summary example file")
    p.add_argument("--out", required=True)
    p.add_argument("--dim-e", type=int, default=64)
    p.add_argument("--dim-h", type=int, default=128)
    p.add_argument("--vocab", type=int, default=5000)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--lr", type=float, default=0.005)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cov-weight", type=float, default=1.0)
    p.add_argument("--coverage-start", type=float, default=0.8,
                   help="fraction of steps before the coverage loss is switched on")
    p.add_argument("--max-src-len", type=int, default=400)
    p.set_defaults(func=cmd_summ_train)

    p = sub.add_parser("summarize", help="summarize blank-line separated paragraphs")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--beam", type=int, default=4)
    p.add_argument("--max-len", type=int, default=100)
    p.add_argument("--min-len", type=int, default=10)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("evaluate", help="ROUGE of candidate lines against reference records")
    p.add_argument("--cand", required=True)
    p.add_argument("--refs", required=True)
    p.add_argument("--n", default="1,2")
    p.add_argument("--mode", choices=("best", "average"), default="best")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run configured experiment variants")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        print(f"dialsumm {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
