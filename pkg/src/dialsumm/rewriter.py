"""Turn a dialogue-act-tagged conversation into an ordered prose paragraph.

Rules run in a fixed order: drop zero-contribution utterances, couple yes/no
questions with their agreement/disagreement, link questions to answers by
content-word overlap, realize agreements/appreciations as short sentences, and
attribute everything left to its speaker with "said that".
"""
from __future__ import annotations

import json
import string
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence, Union

from .corpus import Conversation, TagSet, Utterance, is_punct

DEFAULT_STOPWORDS = frozenset("""
a an the and or but if so then than that this these those there here
i me my mine you your yours he him his she her hers it its we us our ours they them their theirs
is am are was were be been being do does did have has had will would can could should shall may might must
what who whom whose which where when why how
to of in on at by for with from about as into up down out over
not no yes yeah uh um oh well just really very too also like
""".split())

WH_WORDS = frozenset("what who whom whose which where when why how".split())

DEFAULT_TEMPLATES = {
    "attribution": "{speaker} said that {text}.",
    "question-answer": "{qspeaker} asked whether {qtext}, and {speaker} said {text}.",
    "yes-no-agree": "{qspeaker} asked whether {qtext}, and {speaker} agreed {text}.",
    "yes-no-disagree": "{qspeaker} asked whether {qtext}, and {speaker} disagreed {text}.",
    "agreement": "{speaker} agreed.",
    "disagreement": "{speaker} disagreed.",
    "appreciation": "{speaker} appreciated that.",
}

REQUIRED_FIELDS = {
    "attribution": {"speaker", "text"},
    "question-answer": {"qspeaker", "qtext", "speaker", "text"},
    "yes-no-agree": {"qspeaker", "qtext", "speaker", "text"},
    "yes-no-disagree": {"qspeaker", "qtext", "speaker", "text"},
    "agreement": {"speaker"},
    "disagreement": {"speaker"},
    "appreciation": {"speaker"},
}

ACTION_ROLES = ("agreement", "disagreement", "appreciation")


def _placeholders(template: str) -> set[str]:
    return {name for _, name, _, _ in string.Formatter().parse(template) if name}


@dataclass(frozen=True)
class RewriteConfig:
    removable_roles: frozenset = frozenset({"removable"})
    qa_window: int = 3
    qa_min_overlap: int = 1
    stopwords: frozenset = DEFAULT_STOPWORDS
    templates: dict = field(default_factory=lambda: dict(DEFAULT_TEMPLATES), hash=False)

    def __post_init__(self):
        object.__setattr__(self, "removable_roles", frozenset(self.removable_roles))
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))
        if self.qa_window < 1 or self.qa_min_overlap < 1:
            raise ValueError("qa_window and qa_min_overlap must be positive")
        templates = dict(DEFAULT_TEMPLATES)
        templates.update(self.templates)
        for name, required in REQUIRED_FIELDS.items():
            missing = required - _placeholders(templates[name])
            if missing:
                raise ValueError(f"template {name!r} lacks placeholders {sorted(missing)}")
        object.__setattr__(self, "templates", templates)


def load_rewrite_config(path: str | Path) -> RewriteConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {f.name for f in fields(RewriteConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown rewrite config keys: {sorted(unknown)}")
    return RewriteConfig(**raw)


def dump_rewrite_config(cfg: RewriteConfig) -> str:
    return json.dumps({
        "removable_roles": sorted(cfg.removable_roles),
        "qa_window": cfg.qa_window,
        "qa_min_overlap": cfg.qa_min_overlap,
        "stopwords": sorted(cfg.stopwords),
        "templates": cfg.templates,
    }, indent=2) + "\n"


@dataclass(frozen=True)
class Variant:
    """Which rewriting stages run. Q&A joining needs CRF-predicted question roles."""
    name: str
    use_crf_tags: bool = False
    remove_redundant: bool = False
    realize_actions: bool = False
    join_qa: bool = False
    join_wh: bool = False

    def __post_init__(self):
        if (self.join_qa or self.join_wh) and not self.use_crf_tags:
            raise ValueError(f"variant {self.name!r}: join_qa/join_wh require use_crf_tags")

    @property
    def needs_tags(self) -> bool:
        return self.remove_redundant or self.realize_actions or self.join_qa or self.join_wh


BASELINE = Variant("said-that")


@dataclass(frozen=True)
class Survivors:
    """Utterances left after removal. Each keeps its original ``index``."""
    id: str
    utterances: tuple[Utterance, ...]
    all_removed: bool = False


@dataclass(frozen=True)
class Sentence:
    text: str
    sources: tuple[int, ...]


@dataclass(frozen=True)
class Document:
    sentences: tuple[Sentence, ...] = ()
    warning: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        firsts = [min(s.sources) for s in self.sentences]
        if any(not s.sources for s in self.sentences) or firsts != sorted(firsts):
            raise ValueError("sentences must have sources and be ordered by their first source")

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


Tagged = Union[Conversation, Survivors]


def _role(utt: Utterance, tagset: TagSet) -> str:
    return tagset.role(utt.da_tag)


def _require_tags(conv: Tagged) -> None:
    for u in conv.utterances:
        if u.da_tag is None:
            raise ValueError(f"conversation {conv.id!r}, utterance {u.index}: missing dialogue-act tag")


def remove_redundant(conv: Tagged, tagset: TagSet, cfg: RewriteConfig = RewriteConfig()) -> Survivors:
    _require_tags(conv)
    kept = tuple(u for u in conv.utterances if _role(u, tagset) not in cfg.removable_roles)
    return Survivors(conv.id, kept, all_removed=not kept)


def content_words(tokens: Sequence[str], stopwords) -> set[str]:
    return {t for t in tokens if t not in stopwords and not is_punct(t)}


def is_wh_question(utt: Utterance) -> bool:
    return any(t in WH_WORDS for t in utt.tokens)


def link_questions_answers(conv: Tagged, tagset: TagSet, cfg: RewriteConfig = RewriteConfig(),
                           include_wh: bool = True, include_other: bool = True,
                           taken: frozenset = frozenset()) -> list[tuple[int, int]]:
    """Pair each question with the first later utterance in the window sharing enough content words.

    ``include_wh``/``include_other`` select wh-questions and the remaining
    question-role utterances. Indices in ``taken`` can be neither question nor
    answer. Returned pairs use original utterance indices.
    """
    utts = conv.utterances
    used = set(taken)
    pairs = []
    for pos, q in enumerate(utts):
        if q.index in used or _role(q, tagset) != "question":
            continue
        if not (include_wh if is_wh_question(q) else include_other):
            continue
        q_words = content_words(q.tokens, cfg.stopwords)
        for a in utts[pos + 1:pos + 1 + cfg.qa_window]:
            if a.index in used:
                continue
            if len(q_words & content_words(a.tokens, cfg.stopwords)) >= cfg.qa_min_overlap:
                pairs.append((q.index, a.index))
                used.update((q.index, a.index))
                break
    return pairs


def couple_yes_no(conv: Tagged, tagset: TagSet, cfg: RewriteConfig = RewriteConfig()) -> list[tuple[int, int, str]]:
    """Couple yes/no questions with the first agreement/disagreement inside the window.

    Later questions claim answers first, so of two questions competing for one
    reply the nearer one wins.
    """
    utts = conv.utterances
    used: set[int] = set()
    out = []
    for pos in range(len(utts) - 1, -1, -1):
        q = utts[pos]
        if _role(q, tagset) != "yes_no_question" or q.index in used:
            continue
        for a in utts[pos + 1:pos + 1 + cfg.qa_window]:
            role = _role(a, tagset)
            if a.index not in used and role in ("agreement", "disagreement"):
                out.append((q.index, a.index, "agree" if role == "agreement" else "disagree"))
                used.update((q.index, a.index))
                break
    out.sort()
    return out


def clean_text(tokens: Sequence[str]) -> str:
    """Tokens joined by spaces with trailing punctuation dropped."""
    toks = list(tokens)
    while toks and is_punct(toks[-1]):
        toks.pop()
    return " ".join(toks)


def realize_action(utt: Utterance, tagset: TagSet, cfg: RewriteConfig = RewriteConfig()) -> str:
    role = _role(utt, tagset)
    if role not in ACTION_ROLES:
        raise ValueError(f"utterance {utt.index} has role {role!r}, not one of {ACTION_ROLES}")
    return cfg.templates[role].format(speaker=utt.speaker)


def attribute_speech(utt: Utterance, cfg: RewriteConfig = RewriteConfig()) -> str:
    if not utt.tokens:
        raise ValueError("empty utterance")
    return cfg.templates["attribution"].format(speaker=utt.speaker, text=clean_text(utt.tokens))


def _pair_sentence(q: Utterance, a: Utterance, template: str) -> str:
    return template.format(qspeaker=q.speaker, qtext=clean_text(q.tokens),
                           speaker=a.speaker, text=clean_text(a.tokens))


def render_document(conv: Tagged, tagset: TagSet, cfg: RewriteConfig = RewriteConfig(),
                    variant: Variant = BASELINE) -> Document:
    if variant.needs_tags:
        _require_tags(conv)
    if variant.remove_redundant:
        survivors = remove_redundant(conv, tagset, cfg)
        if survivors.all_removed:
            return Document((), warning=True)
    else:
        survivors = Survivors(conv.id, tuple(conv.utterances))

    by_index = {u.index: u for u in survivors.utterances}
    pair_of: dict[int, tuple[int, str]] = {}
    if variant.join_qa:
        for q, a, polarity in couple_yes_no(survivors, tagset, cfg):
            pair_of[q] = (a, "yes-no-agree" if polarity == "agree" else "yes-no-disagree")
    if variant.join_qa or variant.join_wh:
        taken = frozenset(pair_of) | frozenset(a for a, _ in pair_of.values())
        for q, a in link_questions_answers(survivors, tagset, cfg, include_wh=variant.join_wh,
                                           include_other=variant.join_qa, taken=taken):
            pair_of[q] = (a, "question-answer")
    answers = {a for a, _ in pair_of.values()}

    sentences = []
    for u in survivors.utterances:
        if u.index in answers:
            continue
        if u.index in pair_of:
            a, template = pair_of[u.index]
            text = _pair_sentence(u, by_index[a], cfg.templates[template])
            sentences.append(Sentence(text, (u.index, a)))
        elif variant.realize_actions and _role(u, tagset) in ACTION_ROLES:
            sentences.append(Sentence(realize_action(u, tagset, cfg), (u.index,)))
        else:
            sentences.append(Sentence(attribute_speech(u, cfg), (u.index,)))
    return Document(tuple(sentences))

