"""Linear-chain CRF over the utterances of a conversation.

Each utterance gets sparse binary features (first utterance, speaker, words,
POS tags). A tag sequence ``y`` scores

    sum_i emission[feats_i, y_i].sum() + transition[START, y_0] + sum_i transition[y_{i-1}, y_i]

where ``START`` is the extra last row of ``transition``. All inference runs in
log space.
"""
from __future__ import annotations

import copy
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from ._blob import read_blob, write_blob
from .corpus import Conversation, TagSet, pos_of

log = logging.getLogger(__name__)

MAGIC = "CRFMODEL/1"


@dataclass(frozen=True)
class FeatureConfig:
    """Feature families beyond the four default ones; all off by default."""
    speaker_change: bool = False
    word_bigrams: bool = False


def feature_strings(conv: Conversation, i: int, cfg: FeatureConfig = FeatureConfig()) -> list[str]:
    if not 0 <= i < len(conv.utterances):
        raise IndexError(f"position {i} out of range for {len(conv.utterances)} utterances")
    utt = conv.utterances[i]
    feats = {f"speaker={utt.speaker}"}
    if i == 0:
        feats.add("first_utt")
    feats.update(f"word={w}" for w in utt.tokens)
    feats.update(f"pos={p}" for p in pos_of(utt))
    if cfg.speaker_change and i > 0 and conv.utterances[i - 1].speaker != utt.speaker:
        feats.add("speaker_change")
    if cfg.word_bigrams:
        feats.update(f"bigram={a}_{b}" for a, b in zip(utt.tokens, utt.tokens[1:]))
    return sorted(feats)


@dataclass(frozen=True)
class FeatureVector:
    active: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.active)) != len(self.active):
            raise ValueError("duplicate feature ids")


def build_feature_dict(convs: Sequence[Conversation], cfg: FeatureConfig = FeatureConfig()) -> dict[str, int]:
    names = set()
    for conv in convs:
        for i in range(len(conv.utterances)):
            names.update(feature_strings(conv, i, cfg))
    return {name: k for k, name in enumerate(sorted(names))}


@dataclass
class CrfModel:
    tagset: TagSet
    features: dict[str, int]
    emission: np.ndarray
    transition: np.ndarray
    feature_config: FeatureConfig = field(default_factory=FeatureConfig)

    def __post_init__(self):
        n_tags = len(self.tagset)
        if self.emission.shape != (len(self.features), n_tags):
            raise ValueError(f"emission shape {self.emission.shape} != {(len(self.features), n_tags)}")
        if self.transition.shape != (n_tags + 1, n_tags):
            raise ValueError(f"transition shape {self.transition.shape} != {(n_tags + 1, n_tags)}")
        if not (np.all(np.isfinite(self.emission)) and np.all(np.isfinite(self.transition))):
            raise ValueError("non-finite CRF weights")

    @classmethod
    def zeros(cls, tagset: TagSet, features: dict[str, int], feature_config: FeatureConfig = FeatureConfig()):
        n = len(tagset)
        return cls(tagset, dict(features), np.zeros((len(features), n)), np.zeros((n + 1, n)), feature_config)

    @property
    def n_tags(self) -> int:
        return len(self.tagset)

    def featurize(self, conv: Conversation) -> list[FeatureVector]:
        return [extract_features(conv, i, self.features, self.feature_config)
                for i in range(len(conv.utterances))]

    def emissions(self, conv: Conversation) -> np.ndarray:
        """(n_utterances, n_tags) emission scores."""
        return _emission_matrix(self.emission, [fv.active for fv in self.featurize(conv)])

    def weights_vector(self) -> np.ndarray:
        return np.concatenate([self.emission.ravel(), self.transition.ravel()])

    def with_weights(self, vec: np.ndarray) -> "CrfModel":
        k = self.emission.size
        return CrfModel(self.tagset, self.features, vec[:k].reshape(self.emission.shape).copy(),
                        vec[k:].reshape(self.transition.shape).copy(), self.feature_config)


def extract_features(conv: Conversation, i: int, features: dict[str, int],
                     cfg: FeatureConfig = FeatureConfig()) -> FeatureVector:
    """Ids of the active features at position ``i``; names missing from ``features`` are dropped."""
    names = feature_strings(conv, i, cfg)
    return FeatureVector(tuple(sorted(features[n] for n in names if n in features)))


def score_emission(model: CrfModel, fv: FeatureVector, tag: int) -> float:
    return float(model.emission[list(fv.active), tag].sum())


def _emission_matrix(emission: np.ndarray, active: Sequence[Sequence[int]]) -> np.ndarray:
    out = np.empty((len(active), emission.shape[1]))
    for i, ids in enumerate(active):
        out[i] = emission[list(ids)].sum(axis=0)
    return out


def _path_score(em: np.ndarray, trans: np.ndarray, tags: Sequence[int]) -> float:
    start = trans.shape[0] - 1
    total = trans[start, tags[0]] + em[0, tags[0]]
    for i in range(1, len(tags)):
        total += trans[tags[i - 1], tags[i]] + em[i, tags[i]]
    return float(total)


def _forward(em: np.ndarray, trans: np.ndarray) -> np.ndarray:
    n, _ = em.shape
    alpha = np.empty_like(em)
    alpha[0] = trans[-1] + em[0]
    inner = trans[:-1]
    for i in range(1, n):
        alpha[i] = logsumexp(alpha[i - 1][:, None] + inner, axis=0) + em[i]
    return alpha


def _backward(em: np.ndarray, trans: np.ndarray) -> np.ndarray:
    n, _ = em.shape
    beta = np.zeros_like(em)
    inner = trans[:-1]
    for i in range(n - 2, -1, -1):
        beta[i] = logsumexp(inner + (em[i + 1] + beta[i + 1])[None, :], axis=1)
    return beta


def _marginals(em: np.ndarray, trans: np.ndarray):
    alpha = _forward(em, trans)
    beta = _backward(em, trans)
    log_z = float(logsumexp(alpha[-1]))
    node = np.exp(alpha + beta - log_z)
    edge = np.exp(alpha[:-1, :, None] + trans[None, :-1, :]
                  + (em[1:] + beta[1:])[:, None, :] - log_z)
    # renormalize away rounding drift
    node /= node.sum(axis=1, keepdims=True)
    edge /= edge.sum(axis=(1, 2), keepdims=True)
    return log_z, node, edge


def _viterbi(em: np.ndarray, trans: np.ndarray) -> tuple[list[int], float]:
    n, _ = em.shape
    delta = trans[-1] + em[0]
    back = np.empty(em.shape, dtype=np.int64)
    inner = trans[:-1]
    for i in range(1, n):
        cand = delta[:, None] + inner
        # argmax takes the first maximum: ties go to the lowest previous tag
        back[i] = np.argmax(cand, axis=0)
        delta = cand[back[i], np.arange(cand.shape[1])] + em[i]
    best = int(np.argmax(delta))
    path = [best]
    for i in range(n - 1, 0, -1):
        best = int(back[i, best])
        path.append(best)
    path.reverse()
    return path, _path_score(em, trans, path)


def sequence_score(model: CrfModel, conv: Conversation, tags: Sequence[int]) -> float:
    return _path_score(model.emissions(conv), model.transition, tags)


def log_partition(model: CrfModel, conv: Conversation) -> float:
    return float(logsumexp(_forward(model.emissions(conv), model.transition)[-1]))


def viterbi_decode(model: CrfModel, conv: Conversation) -> tuple[list[int], float]:
    return _viterbi(model.emissions(conv), model.transition)


def posterior_marginals(model: CrfModel, conv: Conversation) -> tuple[np.ndarray, np.ndarray]:
    """Node marginals (n, T) and edge marginals (n-1, T, T) for consecutive positions."""
    _, node, edge = _marginals(model.emissions(conv), model.transition)
    return node, edge


def predict_tags(model: CrfModel, conv: Conversation) -> list[str]:
    path, _ = viterbi_decode(model, conv)
    return [model.tagset.tags[k] for k in path]


def tag_conversation(model: CrfModel, conv: Conversation) -> Conversation:
    return conv.with_tags(predict_tags(model, conv))


# --- training ---------------------------------------------------------------

@dataclass
class _Prepared:
    active: list[list[int]]
    gold: list[int]


def _prepare(model: CrfModel, conv: Conversation) -> _Prepared:
    gold = []
    for u in conv.utterances:
        if u.da_tag is None:
            raise ValueError(f"conversation {conv.id!r}, utterance {u.index}: missing gold tag")
        if u.da_tag not in model.tagset:
            raise ValueError(f"conversation {conv.id!r}, utterance {u.index}: tag {u.da_tag!r} not in tag set")
        gold.append(model.tagset.index(u.da_tag))
    return _Prepared([list(fv.active) for fv in model.featurize(conv)], gold)


def _accumulate(emission, transition, prep: _Prepared, g_em, g_tr) -> float:
    """Add one conversation's log-likelihood gradient into g_em/g_tr; return its log-likelihood."""
    em = _emission_matrix(emission, prep.active)
    log_z, node, edge = _marginals(em, transition)
    gold = prep.gold
    start = transition.shape[0] - 1
    for i, ids in enumerate(prep.active):
        g_em[ids, gold[i]] += 1.0
        g_em[ids] -= node[i]
    g_tr[start, gold[0]] += 1.0
    g_tr[start] -= node[0]
    for i in range(1, len(gold)):
        g_tr[gold[i - 1], gold[i]] += 1.0
    if len(gold) > 1:
        g_tr[:-1] -= edge.sum(axis=0)
    return _path_score(em, transition, gold) - log_z


def _objective(emission, transition, prepared, l2_lambda):
    g_em = np.zeros_like(emission)
    g_tr = np.zeros_like(transition)
    value = 0.0
    for prep in prepared:
        value += _accumulate(emission, transition, prep, g_em, g_tr)
    value -= 0.5 * l2_lambda * (np.sum(emission ** 2) + np.sum(transition ** 2))
    g_em -= l2_lambda * emission
    g_tr -= l2_lambda * transition
    return value, g_em, g_tr


def log_likelihood_and_gradient(model: CrfModel, batch: Sequence[Conversation],
                                l2_lambda: float) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Penalized log-likelihood of ``batch`` and its gradient as (d_emission, d_transition)."""
    prepared = [_prepare(model, conv) for conv in batch]
    value, g_em, g_tr = _objective(model.emission, model.transition, prepared, l2_lambda)
    return value, (g_em, g_tr)


@dataclass(frozen=True)
class TrainConfig:
    l2_lambda: float = 0.1
    learning_rate: float = 0.05
    epochs: int = 20
    seed: int = 0
    early_stop_patience: int = 3
    batch_size: int = 8

    def __post_init__(self):
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.early_stop_patience < 1 or self.batch_size < 1:
            raise ValueError("early_stop_patience and batch_size must be positive")


def train(corpus: Sequence[Conversation], dev: Sequence[Conversation], cfg: TrainConfig,
          tagset: TagSet, feature_config: FeatureConfig = FeatureConfig()) -> CrfModel:
    """Mini-batch Adam ascent on the penalized log-likelihood.

    Keeps the weights with the best dev accuracy (checked after each epoch) and
    stops after ``early_stop_patience`` epochs without improvement. With an
    empty dev set the last epoch's weights are returned.
    """
    if not corpus:
        raise ValueError("empty training corpus")
    model = CrfModel.zeros(tagset, build_feature_dict(corpus, feature_config), feature_config)
    prepared = [_prepare(model, conv) for conv in corpus]
    rng = np.random.default_rng(cfg.seed)
    b1, b2, eps = 0.9, 0.999, 1e-8
    m_em, v_em = np.zeros_like(model.emission), np.zeros_like(model.emission)
    m_tr, v_tr = np.zeros_like(model.transition), np.zeros_like(model.transition)
    step = 0
    best, best_acc, stale = None, -1.0, 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(prepared))
        total = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = [prepared[k] for k in order[start:start + cfg.batch_size]]
            # regularizer spread over batches so one epoch applies it once
            lam = cfg.l2_lambda * len(batch) / len(prepared)
            value, g_em, g_tr = _objective(model.emission, model.transition, batch, lam)
            if not np.isfinite(value):
                raise FloatingPointError(f"non-finite objective {value} at epoch {epoch}, step {step}")
            total += value
            step += 1
            for w, g, m, v in ((model.emission, g_em, m_em, v_em), (model.transition, g_tr, m_tr, v_tr)):
                m *= b1
                m += (1 - b1) * g
                v *= b2
                v += (1 - b2) * g * g
                w += cfg.learning_rate * (m / (1 - b1 ** step)) / (np.sqrt(v / (1 - b2 ** step)) + eps)
        if dev:
            acc = evaluate_accuracy(model, dev)
            log.info("epoch %d  objective %.4f  dev acc %.4f", epoch, total, acc)
            if acc > best_acc:
                best, best_acc, stale = copy.deepcopy(model), acc, 0
            else:
                stale += 1
                if stale >= cfg.early_stop_patience:
                    break
        else:
            log.info("epoch %d  objective %.4f", epoch, total)
    return best if best is not None else model


def evaluate_accuracy(model: CrfModel, test: Sequence[Conversation]) -> float:
    correct = total = 0
    for conv in test:
        pred = predict_tags(model, conv)
        for p, u in zip(pred, conv.utterances):
            if u.da_tag is None:
                raise ValueError(f"conversation {conv.id!r}, utterance {u.index}: missing gold tag")
            correct += p == u.da_tag
            total += 1
    if total == 0:
        raise ValueError("empty test set")
    return correct / total


# --- persistence ------------------------------------------------------------

def save_model(model: CrfModel, path: str | Path) -> None:
    names = sorted(model.features, key=model.features.__getitem__)
    meta = {
        "tags": list(model.tagset.tags),
        "roles": [model.tagset.roles[t] for t in model.tagset.tags],
        "features": names,
        "feature_config": asdict(model.feature_config),
    }
    write_blob(path, MAGIC, meta, {"emission": model.emission, "transition": model.transition})


def load_model(path: str | Path) -> CrfModel:
    meta, arrays = read_blob(path, MAGIC)
    tagset = TagSet(tuple(meta["tags"]), dict(zip(meta["tags"], meta["roles"])))
    features = {name: k for k, name in enumerate(meta["features"])}
    return CrfModel(tagset, features, arrays["emission"], arrays["transition"],
                    FeatureConfig(**meta["feature_config"]))
