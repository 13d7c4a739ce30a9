"""Write the synthetic corpora used by the experiments in CLI-ready formats.

    python scripts/make_synthetic_data.py --out data/synthetic

Produces a dialogue-act corpus (train/dev/test TSV plus its tag file) and a
copy-task corpus (summary example files) whose summary is the first sentence
of each article.
"""
from __future__ import annotations

import argparse
from pathlib import Path

from dialsumm.corpus import SummaryExample, save_conversations, serialize_summary_examples, serialize_tagset
from dialsumm.synthetic import DA_TAGSET, generate_copy_task, generate_da_corpus


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--conversations", type=int, default=500)
    ap.add_argument("--pairs", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    convs = generate_da_corpus(args.conversations, seed=args.seed)
    n_train, n_dev = int(0.7 * len(convs)), int(0.1 * len(convs))
    save_conversations(convs[:n_train], args.out / "da_train.tsv")
    save_conversations(convs[n_train:n_train + n_dev], args.out / "da_dev.tsv")
    save_conversations(convs[n_train + n_dev:], args.out / "da_test.tsv")
    (args.out / "da_tagset.tsv").write_text(serialize_tagset(DA_TAGSET), encoding="utf-8")

    for name, pairs in (("copy_train.txt", generate_copy_task(args.pairs, seed=args.seed + 1)),
                        ("copy_test.txt", generate_copy_task(50, seed=args.seed + 2))):
        examples = [SummaryExample(src, [tgt], f"copy{i:04d}") for i, (src, tgt) in enumerate(pairs)]
        (args.out / name).write_text(serialize_summary_examples(examples), encoding="utf-8")
    print(f"wrote synthetic corpora to {args.out}")


if __name__ == "__main__":
    main()
