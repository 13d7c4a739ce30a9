"""Synthetic corpora with known structure, for tests and desk-scale experiments."""
from __future__ import annotations

import numpy as np

from .corpus import Conversation, TagSet, Utterance

_SYLLABLES = ("ka", "lo", "mi", "ra", "tu", "ve", "no", "si", "pa", "de", "gu", "fe",
              "zo", "bi", "ny", "qa", "wo", "he")


def pseudo_words(n: int, seed: int = 0) -> list[str]:
    """``n`` distinct lowercase pseudo-words of two or three syllables."""
    rng = np.random.default_rng(seed)
    words: list[str] = []
    seen = set()
    while len(words) < n:
        k = int(rng.integers(2, 4))
        w = "".join(_SYLLABLES[i] for i in rng.integers(0, len(_SYLLABLES), size=k))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


# --- dialogue-act corpus ----------------------------------------------------
#
# Each tag has cue words. Two cues are shared: "yes" marks an agreement after a
# yes/no question and a backchannel otherwise; "no" marks a disagreement after
# a yes/no question and an answer otherwise. Telling them apart needs the
# previous tag.

DA_TAGSET = TagSet(
    ("sd", "qy", "qw", "aa", "nn", "b", "na", "ba", "fp", "fc", "x"),
    {"sd": "statement", "qy": "yes_no_question", "qw": "question", "aa": "agreement",
     "nn": "disagreement", "b": "other", "na": "answer", "ba": "appreciation",
     "fp": "removable", "fc": "removable", "x": "removable"},
)

_CUES = {
    "sd": ["think", "believe", "guess", "know"],
    "qy": ["do", "did", "are", "is"],
    "qw": ["what", "why", "how", "where"],
    "aa": ["yes"],
    "nn": ["no"],
    "b": ["yes"],
    "na": ["no"],
    "ba": ["wonderful", "great", "nice"],
    "fp": ["hello", "hi"],
    "fc": ["bye", "goodbye"],
    "x": ["laughter", "cough"],
}

# next-tag distribution for each tag (None = conversation start)
_TRANSITIONS = {
    None: {"fp": 1.0},
    "fp": {"sd": 0.5, "qy": 0.25, "qw": 0.25},
    "sd": {"sd": 0.25, "qy": 0.2, "qw": 0.15, "b": 0.15, "na": 0.1, "ba": 0.1, "x": 0.05},
    "qy": {"aa": 0.5, "nn": 0.5},
    "qw": {"sd": 1.0},
    "aa": {"sd": 0.5, "qy": 0.2, "qw": 0.2, "x": 0.1},
    "nn": {"sd": 0.6, "qy": 0.2, "qw": 0.2},
    "b": {"sd": 0.6, "qy": 0.2, "qw": 0.2},
    "na": {"sd": 0.6, "qy": 0.2, "qw": 0.2},
    "ba": {"sd": 0.6, "qw": 0.2, "qy": 0.2},
    "x": {"sd": 0.6, "qy": 0.2, "qw": 0.2},
}


def generate_da_corpus(n_convs: int, seed: int = 0, min_len: int = 6, max_len: int = 14,
                       n_topic_words: int = 60) -> list[Conversation]:
    """Conversations whose tags follow a Markov chain and show through cue words."""
    rng = np.random.default_rng(seed)
    topic = pseudo_words(n_topic_words, seed=seed + 1000)
    convs = []
    for c in range(n_convs):
        length = int(rng.integers(min_len, max_len + 1))
        tags: list[str] = []
        prev = None
        while len(tags) < length - 1:
            options = _TRANSITIONS[prev]
            names = sorted(options)
            nxt = names[int(rng.choice(len(names), p=[options[k] for k in names]))]
            if nxt == "fp" and tags:
                continue
            tags.append(nxt)
            prev = nxt
        tags.append("fc")
        utts = []
        speakers = ("A", "B")
        for i, tag in enumerate(tags):
            cues = _CUES[tag]
            words = [cues[int(rng.integers(len(cues)))]]
            if tag in ("sd", "qy", "qw", "ba"):
                words += [topic[int(k)] for k in rng.integers(0, len(topic), size=int(rng.integers(1, 4)))]
            if tag in ("qy", "qw"):
                words.append("?")
            utts.append(Utterance(speakers[i % 2], words, None, tag, i))
        convs.append(Conversation(f"syn{c:04d}", utts))
    return convs


# --- copy task ----------------------------------------------------------------

def generate_copy_task(n_pairs: int, seed: int = 0, n_sentences: tuple[int, int] = (2, 4),
                       sentence_len: tuple[int, int] = (3, 6), n_words: int = 150,
                       vocab_seed: int = 7) -> list[tuple[list[str], list[str]]]:
    """(article, summary) pairs where the summary is the article's first sentence."""
    rng = np.random.default_rng(seed)
    pool = pseudo_words(n_words, seed=vocab_seed)
    pairs = []
    for _ in range(n_pairs):
        sentences = []
        for _ in range(int(rng.integers(n_sentences[0], n_sentences[1] + 1))):
            k = int(rng.integers(sentence_len[0], sentence_len[1] + 1))
            sentences.append([pool[int(j)] for j in rng.integers(0, len(pool), size=k)] + ["."])
        pairs.append(([w for s in sentences for w in s], sentences[0]))
    return pairs
