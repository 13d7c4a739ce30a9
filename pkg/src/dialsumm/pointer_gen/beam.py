"""Beam search with length normalization over any step function.

``step_fn(state, token) -> (log_probs, new_state)`` gives log-probabilities
over the (extended) vocabulary for the token following ``token``. Disallowed
tokens carry ``-inf``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .model import PointerGenerator, decode_step, encode_tokens
from .vocab import START, STOP, UNK

StepFn = Callable[[Any, int], "tuple[np.ndarray, Any]"]


@dataclass
class Hypothesis:
    tokens: tuple[int, ...]
    log_prob: float
    state: Any

    def score(self) -> float:
        return self.log_prob / max(len(self.tokens), 1)


def _mask_stop(log_probs: np.ndarray, n_tokens: int, min_len: int, stop_id: int) -> np.ndarray:
    if n_tokens < min_len:
        log_probs = log_probs.copy()
        log_probs[stop_id] = -np.inf
    return log_probs


def beam_search(step_fn: StepFn, init_state, beam_width: int, max_len: int, min_len: int,
                start_id: int = START, stop_id: int = STOP) -> list[int]:
    """Best completed hypothesis by mean log-probability per emitted token (STOP counted).

    STOP is only allowed once ``min_len`` tokens exist. Output excludes STOP and
    has at most ``max_len`` tokens. Ties go to the lower token id.
    """
    if beam_width < 1 or not 1 <= min_len <= max_len:
        raise ValueError("need beam_width >= 1 and 1 <= min_len <= max_len")
    beam = [Hypothesis((), 0.0, init_state)]
    done: list[Hypothesis] = []
    for _ in range(max_len + 1):
        candidates = []
        for rank, hyp in enumerate(beam):
            last = hyp.tokens[-1] if hyp.tokens else start_id
            lp, new_state = step_fn(hyp.state, last)
            lp = _mask_stop(lp, len(hyp.tokens), min_len, stop_id)
            if len(hyp.tokens) >= max_len:
                # only STOP may follow a full-length hypothesis
                forced = np.full_like(lp, -np.inf)
                forced[stop_id] = lp[stop_id]
                lp = forced
            top = np.argsort(-lp, kind="stable")[: 2 * beam_width]
            for tok in top:
                if np.isfinite(lp[tok]):
                    candidates.append((-(hyp.log_prob + lp[tok]), rank, int(tok), hyp, new_state))
        candidates.sort(key=lambda c: c[:3])
        previous, beam = beam, []
        for neg, _, tok, hyp, new_state in candidates:
            if tok == stop_id:
                done.append(Hypothesis(hyp.tokens + (tok,), -neg, None))
            else:
                beam.append(Hypothesis(hyp.tokens + (tok,), -neg, new_state))
            if len(beam) == beam_width:
                break
        if len(done) >= beam_width or not beam:
            break
    pool = done or beam or previous
    best = max(pool, key=lambda h: h.score())
    return [t for t in best.tokens if t != stop_id]


def greedy_search(step_fn: StepFn, init_state, max_len: int, min_len: int,
                  start_id: int = START, stop_id: int = STOP) -> list[int]:
    out: list[int] = []
    state, last = init_state, start_id
    while len(out) < max_len:
        lp, state = step_fn(state, last)
        lp = _mask_stop(lp, len(out), min_len, stop_id)
        last = int(np.argmax(lp))
        if last == stop_id:
            break
        out.append(last)
    return out


def model_step_fn(model: PointerGenerator, tokens: Sequence[str]):
    """Step function and initial state for decoding ``tokens`` with ``model``.

    UNK is masked whenever some source OOV word has at least its probability.
    """
    enc = encode_tokens(model, tokens)
    oov_ids = np.arange(len(model.vocab), enc.n_ext)

    def step(state, token):
        dec_state, coverage = state
        out, new_dec = decode_step(model, dec_state, enc, coverage, token)
        with np.errstate(divide="ignore"):
            lp = np.log(out.final_dist)
        if len(oov_ids) and out.final_dist[oov_ids].max() >= out.final_dist[UNK]:
            lp[UNK] = -np.inf
        return lp, (new_dec, coverage + out.attention)

    return step, (enc.init_state, np.zeros(len(enc))), enc.oovs


def beam_search_decode(model: PointerGenerator, source: Sequence[str], beam_width: int = 4,
                       max_len: int = 100, min_len: int = 10) -> list[str]:
    step, init, oovs = model_step_fn(model, source)
    ids = beam_search(step, init, beam_width, max_len, min_len)
    return model.vocab.to_words(ids, oovs)


def greedy_decode(model: PointerGenerator, source: Sequence[str], max_len: int = 100,
                  min_len: int = 10) -> list[str]:
    step, init, oovs = model_step_fn(model, source)
    return model.vocab.to_words(greedy_search(step, init, max_len, min_len), oovs)
