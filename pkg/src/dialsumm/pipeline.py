"""Tag -> rewrite -> summarize -> score over a corpus, one report row per variant."""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import crf as crf_mod
from .corpus import Conversation, TagSet, load_conversations, load_summary_examples, load_tagset, tokenize
from .pointer_gen import PointerGenerator, beam_search_decode
from .pointer_gen import load_model as load_pgen
from .rewriter import Document, RewriteConfig, Variant, load_rewrite_config, render_document
from .rouge import rouge_multi

log = logging.getLogger(__name__)

# Cumulative variants in the order the experiments introduce them.
STANDARD_VARIANTS = {
    "said-that": Variant("said-that"),
    "remove-redundant": Variant("remove-redundant", use_crf_tags=True, remove_redundant=True),
    "realize-actions": Variant("realize-actions", use_crf_tags=True, remove_redundant=True,
                               realize_actions=True),
    "join-qa": Variant("join-qa", use_crf_tags=True, remove_redundant=True, realize_actions=True,
                       join_qa=True),
    "join-wh": Variant("join-wh", use_crf_tags=True, remove_redundant=True, realize_actions=True,
                       join_qa=True, join_wh=True),
}


@dataclass
class DecodeSettings:
    beam: int = 4
    max_len: int = 100
    min_len: int = 10


@dataclass
class VariantResult:
    variant: str
    documents: list[tuple[str, Document]]
    summaries: list[tuple[str, list[str]]]
    scores: list[tuple[str, float, float]]    # (conv id, ROUGE-1 F1, ROUGE-2 F1)

    @property
    def row(self) -> tuple[str, float | None, float | None]:
        if not self.scores:
            return self.variant, None, None
        r1 = float(np.mean([s[1] for s in self.scores]))
        r2 = float(np.mean([s[2] for s in self.scores]))
        return self.variant, r1, r2


def _tags_for(variant: Variant, conv: Conversation, crf_model: crf_mod.CrfModel | None) -> Conversation:
    if variant.use_crf_tags:
        if crf_model is None:
            raise ValueError(f"variant {variant.name!r} needs a CRF model")
        return crf_mod.tag_conversation(crf_model, conv)
    if variant.needs_tags and any(u.da_tag is None for u in conv.utterances):
        raise ValueError(f"variant {variant.name!r} uses gold tags but conversation {conv.id!r} lacks them")
    return conv


def run_variant(variant: Variant, conversations: Sequence[Conversation],
                crf_model: crf_mod.CrfModel | None, seq2seq: PointerGenerator,
                references: dict[str, list[list[str]]] | None, tagset: TagSet,
                rouge_mode: str = "best", rewrite_cfg: RewriteConfig = RewriteConfig(),
                decode: DecodeSettings = DecodeSettings()) -> VariantResult:
    if not conversations:
        raise ValueError("empty corpus")
    result = VariantResult(variant.name, [], [], [])
    missing = []
    for conv in conversations:
        tagged = _tags_for(variant, conv, crf_model)
        doc = render_document(tagged, tagset, rewrite_cfg, variant)
        tokens = tokenize(doc.text)
        summary = beam_search_decode(seq2seq, tokens, decode.beam, decode.max_len, decode.min_len) if tokens else []
        result.documents.append((conv.id, doc))
        result.summaries.append((conv.id, summary))
        refs = (references or {}).get(conv.id)
        if not refs:
            missing.append(conv.id)
            continue
        r1 = rouge_multi(summary, refs, 1, rouge_mode).f1
        r2 = rouge_multi(summary, refs, 2, rouge_mode).f1
        result.scores.append((conv.id, r1, r2))
    if missing:
        log.warning("variant %s: no references for %d conversation(s), not scored: %s",
                    variant.name, len(missing), ", ".join(missing))
    return result


# --- configured runs --------------------------------------------------------

@dataclass
class PipelineConfig:
    conversations: Path
    pgen_model: Path
    variants: list[Variant]
    out_dir: Path
    references: Path | None = None
    crf_model: Path | None = None
    tagset: Path | None = None
    rewrite_config: Path | None = None
    seed: int = 0
    rouge_mode: str = "best"
    decode: DecodeSettings = field(default_factory=DecodeSettings)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        """Load a JSON config; relative paths resolve against the config's directory.

        ``variants`` entries are either names from STANDARD_VARIANTS or objects
        with Variant fields.
        """
        path = Path(path)
        raw = json.loads(path.read_text(encoding="utf-8"))
        base = path.parent

        def p(key):
            return base / raw[key] if raw.get(key) else None

        variants = []
        for v in raw.get("variants", []):
            if isinstance(v, str):
                if v not in STANDARD_VARIANTS:
                    raise ValueError(f"unknown variant {v!r}; known: {sorted(STANDARD_VARIANTS)}")
                variants.append(STANDARD_VARIANTS[v])
            else:
                variants.append(Variant(**v))
        if not variants:
            raise ValueError("config names no variants")
        for key in ("conversations", "pgen_model", "out_dir"):
            if not raw.get(key):
                raise ValueError(f"config lacks {key!r}")
        return cls(
            conversations=p("conversations"), pgen_model=p("pgen_model"), variants=variants,
            out_dir=p("out_dir"), references=p("references"), crf_model=p("crf_model"),
            tagset=p("tagset"), rewrite_config=p("rewrite_config"), seed=int(raw.get("seed", 0)),
            rouge_mode=raw.get("rouge_mode", "best"), decode=DecodeSettings(**raw.get("decode", {})),
        )

    def digest(self) -> str:
        """SHA-256 over the settings and the bytes of every input file."""
        h = hashlib.sha256()
        settings = {
            "variants": [asdict(v) for v in self.variants],
            "seed": self.seed, "rouge_mode": self.rouge_mode, "decode": asdict(self.decode),
        }
        h.update(json.dumps(settings, sort_keys=True).encode())
        for name in ("conversations", "references", "crf_model", "pgen_model", "tagset", "rewrite_config"):
            fpath = getattr(self, name)
            h.update(name.encode())
            h.update(Path(fpath).read_bytes() if fpath is not None else b"-")
        return h.hexdigest()


@dataclass
class ExperimentReport:
    rows: list[tuple[str, float | None, float | None]]
    config_digest: str
    seed: int
    rouge_mode: str = "best"
    n_conversations: int = 0
    n_scored: list[int] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            "# dialogue summarization experiment report",
            f"# config digest: {self.config_digest}",
            f"# seed: {self.seed}",
            f"# scores: ROUGE-N F1, clipped counts, multi-reference mode '{self.rouge_mode}',",
            f"#         unweighted mean over scored conversations ({self.n_conversations} in corpus)",
            "",
            f"{'Model':<28}{'ROUGE-1':>10}{'ROUGE-2':>10}{'scored':>8}",
        ]
        for (name, r1, r2), n in zip(self.rows, self.n_scored):
            fmt = lambda x: "n/a" if x is None else f"{x:.5f}"  # noqa: E731
            lines.append(f"{name:<28}{fmt(r1):>10}{fmt(r2):>10}{n:>8}")
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"variant": name, "rouge1_f1": r1, "rouge2_f1": r2, "n_scored": n,
                        "config_digest": self.config_digest, "seed": self.seed,
                        "rouge_mode": self.rouge_mode}, sort_keys=True) + "\n"
            for (name, r1, r2), n in zip(self.rows, self.n_scored))


def run_all(config: PipelineConfig) -> ExperimentReport:
    """Run every variant in order and write the report, its JSONL sidecar, documents and summaries."""
    tagset = load_tagset(config.tagset) if config.tagset else None
    crf_model = crf_mod.load_model(config.crf_model) if config.crf_model else None
    if tagset is None:
        if crf_model is None:
            raise ValueError("config needs a tagset or a CRF model")
        tagset = crf_model.tagset
    convs = load_conversations(config.conversations, tagset)
    references = None
    if config.references:
        references = {ex.id: [list(r) for r in ex.references]
                      for ex in load_summary_examples(config.references)}
    else:
        log.warning("no references configured; summaries are written but not scored")
    seq2seq = load_pgen(config.pgen_model)
    rewrite_cfg = load_rewrite_config(config.rewrite_config) if config.rewrite_config else RewriteConfig()

    out = Path(config.out_dir)
    (out / "summaries").mkdir(parents=True, exist_ok=True)
    (out / "documents").mkdir(parents=True, exist_ok=True)
    report = ExperimentReport([], config.digest(), config.seed, config.rouge_mode, len(convs))
    for variant in config.variants:
        res = run_variant(variant, convs, crf_model, seq2seq, references, tagset,
                          config.rouge_mode, rewrite_cfg, config.decode)
        report.rows.append(res.row)
        report.n_scored.append(len(res.scores))
        (out / "summaries" / f"{variant.name}.txt").write_text(
            "".join(f"{cid}\t{' '.join(toks)}\n" for cid, toks in res.summaries), encoding="utf-8")
        (out / "documents" / f"{variant.name}.txt").write_text(
            "".join(f"{cid}\t{doc.text}\n" for cid, doc in res.documents), encoding="utf-8")
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    (out / "report.jsonl").write_text(report.to_jsonl(), encoding="utf-8")
    return report
