"""Rebuild the tiny models and expected report for the pipeline golden mini-corpus.

Run from the repository root:

    python scripts/build_pipeline_golden.py

Only needed when model or report formats change on purpose; the test suite
compares fresh pipeline runs against the files this writes. The summarizer is
fit to these very references, so its scores are high by construction: the
fixture pins down determinism, not quality.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from dialsumm import crf
from dialsumm.corpus import default_tagset, load_conversations, load_summary_examples, tokenize
from dialsumm.pipeline import STANDARD_VARIANTS, PipelineConfig, run_all
from dialsumm.pointer_gen import ModelConfig, PointerGenerator, TrainConfig, build_vocab, save_model, train
from dialsumm.rewriter import RewriteConfig, render_document

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "data" / "pipeline_golden"

CONFIG = {
    "conversations": "conversations.tsv",
    "references": "references.txt",
    "crf_model": "crf.model",
    "pgen_model": "pgen.model",
    "out_dir": "out",
    "variants": ["said-that", "remove-redundant", "realize-actions", "join-qa", "join-wh"],
    "seed": 0,
    "rouge_mode": "best",
    "decode": {"beam": 4, "max_len": 20, "min_len": 3},
}


def main() -> None:
    tagset = default_tagset()
    convs = load_conversations(GOLDEN / "conversations.tsv", tagset)
    extra = load_conversations(ROOT / "tests" / "data" / "rewriter_golden" / "conversations.tsv", tagset)
    tagger = crf.train(convs + extra, [], crf.TrainConfig(epochs=15, seed=0), tagset)
    crf.save_model(tagger, GOLDEN / "crf.model")

    refs = {ex.id: ex.references for ex in load_summary_examples(GOLDEN / "references.txt")}
    pairs = []
    for conv in convs:
        for variant in STANDARD_VARIANTS.values():
            doc = tokenize(render_document(conv, tagset, RewriteConfig(), variant).text)
            pairs += [(doc, list(r)) for r in refs[conv.id]]
    vocab = build_vocab([s for s, _ in pairs] + [t for _, t in pairs], 60)
    model = PointerGenerator(vocab, ModelConfig(d_e=16, d_h=16, seed=0))
    model = train(model, pairs, TrainConfig(steps=400, batch_size=4, learning_rate=0.01, seed=0))
    save_model(model, GOLDEN / "pgen.model")

    (GOLDEN / "config.json").write_text(json.dumps(CONFIG, indent=2) + "\n", encoding="utf-8")
    cfg = PipelineConfig.from_file(GOLDEN / "config.json")
    run_all(dataclasses.replace(cfg, out_dir=GOLDEN / "expected"))
    print((GOLDEN / "expected" / "report.txt").read_text())


if __name__ == "__main__":
    main()
