"""Conversations, tag sets and article/summary pairs: types, file formats, tokenizer.

Conversation files are tab-separated, one utterance per line::

    conv_id  utt_index  speaker  da_tag  text  [pos]

``da_tag`` may be empty, ``pos`` is optional and space-separated with one tag
per token of the tokenized text. Lines starting with ``#`` are comments.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

ROLES = frozenset({
    "removable", "question", "yes_no_question", "answer", "agreement",
    "disagreement", "appreciation", "statement", "other",
})

POS_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "PREP", "CONJ",
            "NUM", "INTJ", "PUNCT", "OTHER")


class CorpusFormatError(ValueError):
    """Malformed input file. ``lineno`` is 1-based, or None when not line-specific."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class UnknownTagError(CorpusFormatError):
    def __init__(self, tag: str, lineno: int | None = None):
        self.tag = tag
        super().__init__(f"unknown dialogue-act tag {tag!r}", lineno)


@dataclass(frozen=True)
class Utterance:
    speaker: str
    tokens: tuple[str, ...]
    pos_tags: tuple[str, ...] | None = None
    da_tag: str | None = None
    index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.pos_tags is not None:
            object.__setattr__(self, "pos_tags", tuple(self.pos_tags))
        if not self.speaker or any(c in self.speaker for c in "\t\n"):
            raise ValueError(f"bad speaker {self.speaker!r}")
        if not self.tokens:
            raise ValueError("utterance has no tokens")
        if self.pos_tags is not None and len(self.pos_tags) != len(self.tokens):
            raise ValueError(
                f"{len(self.pos_tags)} POS tags for {len(self.tokens)} tokens")
        if self.da_tag == "":
            object.__setattr__(self, "da_tag", None)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class Conversation:
    id: str
    utterances: tuple[Utterance, ...]

    def __post_init__(self):
        object.__setattr__(self, "utterances", tuple(self.utterances))
        if not self.utterances:
            raise ValueError(f"conversation {self.id!r} has no utterances")
        for pos, utt in enumerate(self.utterances):
            if utt.index != pos:
                raise ValueError(
                    f"conversation {self.id!r}: utterance at position {pos} has index {utt.index}")

    def __len__(self) -> int:
        return len(self.utterances)

    @property
    def tags(self) -> list[str | None]:
        return [u.da_tag for u in self.utterances]

    def with_tags(self, tags: Sequence[str]) -> "Conversation":
        if len(tags) != len(self.utterances):
            raise ValueError("tag count does not match utterance count")
        utts = [Utterance(u.speaker, u.tokens, u.pos_tags, t, u.index)
                for u, t in zip(self.utterances, tags)]
        return Conversation(self.id, utts)


@dataclass(frozen=True)
class TagSet:
    tags: tuple[str, ...]
    roles: dict[str, str] = field(hash=False)

    def __post_init__(self):
        object.__setattr__(self, "tags", tuple(self.tags))
        if len(set(self.tags)) != len(self.tags):
            raise ValueError("duplicate tags in tag set")
        if set(self.roles) != set(self.tags):
            raise ValueError("every tag needs exactly one role")
        bad = {r for r in self.roles.values() if r not in ROLES}
        if bad:
            raise ValueError(f"unknown roles: {sorted(bad)}")

    def __len__(self) -> int:
        return len(self.tags)

    def __contains__(self, tag) -> bool:
        return tag in self.roles

    def index(self, tag: str) -> int:
        return self.tags.index(tag)

    def role(self, tag: str | None) -> str:
        """Role of ``tag``; untagged or unknown tags fall back to ``other``."""
        return self.roles.get(tag, "other")

    def tags_with_role(self, role: str) -> list[str]:
        return [t for t in self.tags if self.roles[t] == role]


@dataclass(frozen=True)
class SummaryExample:
    source_text: tuple[str, ...]
    references: tuple[tuple[str, ...], ...]
    id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "source_text", tuple(self.source_text))
        object.__setattr__(self, "references", tuple(tuple(r) for r in self.references))
        if not self.references:
            raise ValueError("a summary example needs at least one reference")


# --- tokenization -----------------------------------------------------------

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def tokenize(raw: str) -> list[str]:
    """Lowercase, split on whitespace, and split off every punctuation mark."""
    return _TOKEN_RE.findall(raw.lower())


def is_punct(token: str) -> bool:
    return bool(token) and not any(c.isalnum() or c == "_" for c in token)


# --- fallback POS tagger ----------------------------------------------------

_LEXICON_SOURCE = {
    "PRON": "i me my mine myself you your yours yourself he him his himself she her hers "
            "herself it its itself we us our ours ourselves they them their theirs "
            "themselves this these those who whom whose what which",
    "DET": "a an the some any every each no another all both either neither",
    "PREP": "in on at by for with about against between into through during before "
            "after above below to from up down of off over under than like",
    "CONJ": "and or but nor so yet because if although though while whereas unless",
    "INTJ": "yes yeah yep no nope uh um uhhuh huh oh okay ok well hello hi bye goodbye "
            "wow hmm mhm right",
    "VERB": "is am are was were be been being have has had do does did can could will "
            "would shall should may might must get got go went say said think know "
            "like want see make take",
    "ADV": "not very really just too also only never always often here there now then "
           "maybe probably actually quite pretty",
    "NUM": "one two three four five six seven eight nine ten hundred thousand",
}

LEXICON: dict[str, str] = {}
for _tag, _words in _LEXICON_SOURCE.items():
    for _w in _words.split():
        LEXICON.setdefault(_w, _tag)

# Applied in order; first match wins.
SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ly", "ADV"),
    ("tion", "NOUN"),
    ("sion", "NOUN"),
    ("ment", "NOUN"),
    ("ness", "NOUN"),
    ("ity", "NOUN"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("able", "ADJ"),
    ("ible", "ADJ"),
    ("ive", "ADJ"),
    ("ish", "ADJ"),
)


def fallback_pos_tag(tokens: Sequence[str]) -> list[str]:
    """Coarse POS tags: punctuation/number classes, then lexicon, then suffix rules."""
    out = []
    for tok in tokens:
        low = tok.lower()
        if is_punct(low):
            out.append("PUNCT")
        elif low.isdigit():
            out.append("NUM")
        elif low in LEXICON:
            out.append(LEXICON[low])
        else:
            tag = "OTHER"
            for suffix, suffix_tag in SUFFIX_RULES:
                if len(low) > len(suffix) + 1 and low.endswith(suffix):
                    tag = suffix_tag
                    break
            out.append(tag)
    return out


def pos_of(utt: Utterance) -> tuple[str, ...]:
    """Input POS tags when present, otherwise the fallback tagger's."""
    if utt.pos_tags is not None:
        return utt.pos_tags
    return tuple(fallback_pos_tag(utt.tokens))


# --- tag sets ---------------------------------------------------------------

def parse_tagset(lines: Iterable[str]) -> TagSet:
    tags, roles = [], {}
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CorpusFormatError("expected 'tag<TAB>role'", lineno)
        tag, role = parts[0].strip(), parts[1].strip()
        if tag in roles:
            raise CorpusFormatError(f"duplicate tag {tag!r}", lineno)
        if role not in ROLES:
            raise CorpusFormatError(f"unknown role {role!r}", lineno)
        tags.append(tag)
        roles[tag] = role
    return TagSet(tuple(tags), roles)


def load_tagset(path: str | Path) -> TagSet:
    with open(path, encoding="utf-8") as fh:
        return parse_tagset(fh)


def default_tagset() -> TagSet:
    """The bundled 43-tag Switchboard tag set with default rewriting roles."""
    text = resources.files("dialsumm.data").joinpath("swda_tagset.tsv").read_text("utf-8")
    return parse_tagset(text.splitlines())


def serialize_tagset(tagset: TagSet) -> str:
    return "".join(f"{t}\t{tagset.roles[t]}\n" for t in tagset.tags)


# --- conversation files -----------------------------------------------------

def parse_conversations(lines: Iterable[str], tagset: TagSet | None = None) -> list[Conversation]:
    """Parse conversation records. ``tagset=None`` skips tag validation."""
    convs: list[Conversation] = []
    seen: set[str] = set()
    cur_id: str | None = None
    cur: list[Utterance] = []

    def flush():
        if cur_id is not None:
            convs.append(Conversation(cur_id, cur))
            seen.add(cur_id)

    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (5, 6):
            raise CorpusFormatError(f"expected 5 or 6 tab-separated fields, got {len(parts)}", lineno)
        conv_id, idx, speaker, tag, text = parts[:5]
        if not conv_id:
            raise CorpusFormatError("empty conversation id", lineno)
        try:
            idx = int(idx)
        except ValueError:
            raise CorpusFormatError(f"bad utterance index {idx!r}", lineno) from None
        if conv_id != cur_id:
            if conv_id in seen:
                raise CorpusFormatError(f"records for {conv_id!r} are not contiguous", lineno)
            flush()
            cur_id, cur = conv_id, []
        if idx != len(cur):
            raise CorpusFormatError(f"expected utterance index {len(cur)}, got {idx}", lineno)
        tag = tag or None
        if tag is not None and tagset is not None and tag not in tagset:
            raise UnknownTagError(tag, lineno)
        tokens = tokenize(text)
        pos = parts[5].split() if len(parts) == 6 and parts[5].strip() else None
        try:
            cur.append(Utterance(speaker, tokens, pos, tag, idx))
        except ValueError as exc:
            raise CorpusFormatError(str(exc), lineno) from None
    flush()
    return convs


def load_conversations(path: str | Path, tagset: TagSet | None = None) -> list[Conversation]:
    with open(path, encoding="utf-8") as fh:
        return parse_conversations(fh, tagset)


def serialize_conversations(convs: Iterable[Conversation]) -> str:
    rows = []
    for conv in convs:
        for u in conv.utterances:
            fields = [conv.id, str(u.index), u.speaker, u.da_tag or "", u.text]
            if u.pos_tags is not None:
                fields.append(" ".join(u.pos_tags))
            rows.append("\t".join(fields) + "\n")
    return "".join(rows)


def save_conversations(convs: Iterable[Conversation], path: str | Path) -> None:
    Path(path).write_text(serialize_conversations(convs), encoding="utf-8")


# --- summary example files --------------------------------------------------
#
# Records are separated by a line holding exactly ``===``. Inside a record a
# ``source`` header line (optionally ``source <id>``) opens the source block and
# ``ref-1``, ``ref-2``, ... open reference blocks; block text runs to the next
# header.

_REF_HEADER = re.compile(r"^ref-(\d+)$")


def parse_summary_examples(lines: Iterable[str]) -> list[SummaryExample]:
    examples = []
    record: list[tuple[int, str]] = []

    def finish():
        if any(text.strip() for _, text in record):
            examples.append(_parse_record(record))
        record.clear()

    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r\n")
        if line.strip() == "===":
            finish()
        else:
            record.append((lineno, line))
    finish()
    return examples


def _parse_record(record: list[tuple[int, str]]) -> SummaryExample:
    blocks: dict[str, list[str]] = {}
    order: list[str] = []
    current = None
    ex_id = ""
    for lineno, line in record:
        head = line.strip()
        if head == "source" or head.startswith("source "):
            if "source" in blocks:
                raise CorpusFormatError("second source block in record", lineno)
            current = "source"
            ex_id = head[len("source"):].strip()
        elif _REF_HEADER.match(head):
            current = head
            if current in blocks:
                raise CorpusFormatError(f"duplicate block {head!r}", lineno)
            k = int(_REF_HEADER.match(head).group(1))
            if k != sum(name != "source" for name in order) + 1:
                raise CorpusFormatError(f"reference blocks must be numbered 1, 2, ...; got {head!r}", lineno)
        elif current is None:
            if head:
                raise CorpusFormatError("text before any block header", lineno)
            continue
        else:
            blocks[current].append(line)
            continue
        blocks[current] = []
        order.append(current)
    first_line = record[0][0]
    if "source" not in blocks:
        raise CorpusFormatError("record has no source block", first_line)
    refs = [tokenize(" ".join(blocks[k])) for k in order if k != "source"]
    if not refs:
        raise CorpusFormatError("record has no reference blocks", first_line)
    return SummaryExample(tokenize(" ".join(blocks["source"])), refs, ex_id)


def load_summary_examples(path: str | Path) -> list[SummaryExample]:
    with open(path, encoding="utf-8") as fh:
        return parse_summary_examples(fh)


def serialize_summary_examples(examples: Iterable[SummaryExample]) -> str:
    chunks = []
    for ex in examples:
        lines = ["source " + ex.id if ex.id else "source", " ".join(ex.source_text)]
        for k, ref in enumerate(ex.references, 1):
            lines += [f"ref-{k}", " ".join(ref)]
        chunks.append("\n".join(lines) + "\n")
    return "===\n".join(chunks)
