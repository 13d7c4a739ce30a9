from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

PAD, UNK, START, STOP = 0, 1, 2, 3
RESERVED = ("<pad>", "<unk>", "<s>", "</s>")


class Vocab:
    """Word <-> id map with PAD/UNK/START/STOP fixed at ids 0-3.

    Source words missing from the vocabulary get temporary "extended" ids
    ``len(vocab) + k`` so the copy distribution can point at them.
    """

    def __init__(self, words: Sequence[str]):
        words = list(words)
        if tuple(words[:4]) != RESERVED:
            raise ValueError("vocabulary must start with the reserved tokens")
        if len(set(words)) != len(words):
            raise ValueError("duplicate words in vocabulary")
        self.words = words
        self.index = {w: i for i, w in enumerate(words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.words == other.words

    def id(self, word: str) -> int:
        return self.index.get(word, UNK)

    def source_ids(self, tokens: Sequence[str]) -> tuple[list[int], list[int], list[str]]:
        """(ids with UNK for OOV, extended ids, OOV words in first-seen order)."""
        ids, ext, oovs = [], [], []
        for tok in tokens:
            i = self.index.get(tok)
            if i is None:
                if tok not in oovs:
                    oovs.append(tok)
                ids.append(UNK)
                ext.append(len(self.words) + oovs.index(tok))
            else:
                ids.append(i)
                ext.append(i)
        return ids, ext, oovs

    def target_ids(self, tokens: Sequence[str], oovs: Sequence[str]) -> list[int]:
        """Extended ids for a target sequence, STOP appended; OOVs absent from the source map to UNK."""
        out = []
        for tok in tokens:
            i = self.index.get(tok)
            if i is None:
                i = len(self.words) + oovs.index(tok) if tok in oovs else UNK
            out.append(i)
        out.append(STOP)
        return out

    def to_words(self, ids: Iterable[int], oovs: Sequence[str] = ()) -> list[str]:
        n = len(self.words)
        return [self.words[i] if i < n else oovs[i - n] for i in ids]


def build_vocab(corpus: Iterable[Sequence[str]], max_size: int) -> Vocab:
    """Reserved tokens plus the ``max_size - 4`` most frequent words (ties lexicographic)."""
    if max_size <= len(RESERVED):
        raise ValueError(f"max_size must exceed {len(RESERVED)}")
    counts = Counter()
    for seq in corpus:
        counts.update(seq)
    for tok in RESERVED:
        counts.pop(tok, None)
    if not counts:
        raise ValueError("empty corpus")
    ranked = sorted(counts, key=lambda w: (-counts[w], w))
    return Vocab(list(RESERVED) + ranked[: max_size - len(RESERVED)])
