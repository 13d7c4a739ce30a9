"""Pointer-generator encoder-decoder with coverage, forward and hand-written backward pass.

Shapes: ``n`` source length, ``V`` vocabulary size, ``de`` embedding size,
``dh`` hidden size per direction. Encoder states are ``2*dh`` wide.

Per decoder step t, with decoder state ``s``, encoder states ``H`` and
coverage ``c`` (sum of earlier attention vectors)::

    e_i   = v . tanh(Wh H_i + Ws s + wc c_i + b_att)
    a     = softmax(e)
    ctx   = sum_i a_i H_i
    P_voc = softmax(W_out [s; ctx] + b_out)
    p_gen = sigmoid(wg_ctx . ctx + wg_s . s + wg_x . x + b_gen)
    P(w)  = p_gen P_voc(w) + (1 - p_gen) sum_{i: src_i = w} a_i

and the per-step loss is ``-log P(y_t) + cov_weight * sum_i min(a_i, c_i)``,
averaged over target steps.

GRU cells use z (update), r (reset), n (candidate) gate blocks, stacked in
that order along the first axis of W/U/b::

    h' = (1 - z) * n + z * h,   n = tanh(W_n x + U_n (r * h) + b_n)
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .._blob import read_blob, write_blob
from .vocab import START, UNK, Vocab

MAGIC = "PGEN/1"


@dataclass(frozen=True)
class ModelConfig:
    d_e: int = 64
    d_h: int = 128
    cov_weight: float = 1.0
    init_scale: float = 0.1
    seed: int = 0


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softmax(x):
    e = np.exp(x - x.max())
    return e / e.sum()


def param_shapes(vocab_size: int, d_e: int, d_h: int) -> dict[str, tuple[int, ...]]:
    V, de, dh = vocab_size, d_e, d_h
    return {
        "emb": (V, de),
        "encf_W": (3 * dh, de), "encf_U": (3 * dh, dh), "encf_b": (3 * dh,),
        "encb_W": (3 * dh, de), "encb_U": (3 * dh, dh), "encb_b": (3 * dh,),
        "red_W": (dh, 2 * dh), "red_b": (dh,),
        "dec_W": (3 * dh, de), "dec_U": (3 * dh, dh), "dec_b": (3 * dh,),
        "att_Wh": (dh, 2 * dh), "att_Ws": (dh, dh), "att_wc": (dh,), "att_b": (dh,), "att_v": (dh,),
        "out_W": (V, 3 * dh), "out_b": (V,),
        "gen_wctx": (2 * dh,), "gen_ws": (dh,), "gen_wx": (de,), "gen_b": (1,),
    }


class PointerGenerator:
    def __init__(self, vocab: Vocab, config: ModelConfig = ModelConfig(),
                 params: dict[str, np.ndarray] | None = None):
        self.vocab = vocab
        self.config = config
        shapes = param_shapes(len(vocab), config.d_e, config.d_h)
        if params is None:
            rng = np.random.default_rng(config.seed)
            params = {}
            for name, shape in shapes.items():
                if name.endswith("_b"):
                    params[name] = np.zeros(shape)
                else:
                    params[name] = rng.uniform(-config.init_scale, config.init_scale, shape)
        if set(params) != set(shapes):
            raise ValueError(f"parameter names differ: {sorted(set(params) ^ set(shapes))}")
        for name, shape in shapes.items():
            if params[name].shape != shape:
                raise ValueError(f"{name}: shape {params[name].shape}, expected {shape}")
            if not np.all(np.isfinite(params[name])):
                raise ValueError(f"{name}: non-finite values")
        self.params = {k: np.asarray(v, dtype=np.float64) for k, v in params.items()}

    @property
    def d_h(self) -> int:
        return self.config.d_h

    def copy(self) -> "PointerGenerator":
        return PointerGenerator(self.vocab, self.config, {k: v.copy() for k, v in self.params.items()})


# --- GRU --------------------------------------------------------------------

def _gru_step(U, gx, h):
    """One step given the precomputed input projection ``gx = W x + b``."""
    d = h.shape[0]
    gh = U[: 2 * d] @ h
    z = _sigmoid(gx[:d] + gh[:d])
    r = _sigmoid(gx[d:2 * d] + gh[d:])
    rh = r * h
    n = np.tanh(gx[2 * d:] + U[2 * d:] @ rh)
    return (1.0 - z) * n + z * h, (h, z, r, n, rh)


def _gru_step_back(U, dh_new, cache, gU):
    """Backprop one step. Returns (d gate pre-activations from the input side, d h_prev)."""
    h, z, r, n, rh = cache
    d = h.shape[0]
    dn = dh_new * (1.0 - z)
    dz = dh_new * (h - n)
    dh = dh_new * z
    dn_pre = dn * (1.0 - n * n)
    gU[2 * d:] += np.outer(dn_pre, rh)
    drh = U[2 * d:].T @ dn_pre
    dh += drh * r
    dr = drh * h
    dzr = np.concatenate([dz * z * (1.0 - z), dr * r * (1.0 - r)])
    gU[: 2 * d] += np.outer(dzr, h)
    dh += U[: 2 * d].T @ dzr
    return np.concatenate([dzr, dn_pre]), dh


# --- encoder ----------------------------------------------------------------

@dataclass
class Encoded:
    """Encoder output for one source plus what decoding needs."""
    states: np.ndarray          # (n, 2*dh)
    att_feat: np.ndarray        # (n, dh) = states @ att_Wh.T
    init_state: np.ndarray      # (dh,)
    src_ext: np.ndarray         # (n,) extended ids
    n_ext: int
    oovs: list
    cache: tuple | None = None

    def __len__(self) -> int:
        return self.states.shape[0]


def encode(model: PointerGenerator, src_ids: Sequence[int], src_ext: Sequence[int] | None = None,
           oovs: Sequence[str] = ()) -> Encoded:
    """Run the bidirectional encoder. ``src_ids`` must already map OOV words to UNK."""
    p = model.params
    n = len(src_ids)
    if n == 0:
        raise ValueError("empty source")
    dh = model.d_h
    ids = np.asarray(src_ids)
    if np.any(ids >= len(model.vocab)) or np.any(ids < 0):
        raise ValueError("source ids outside the vocabulary; map OOV words to UNK")
    X = p["emb"][ids]
    GXf = X @ p["encf_W"].T + p["encf_b"]
    GXb = X @ p["encb_W"].T + p["encb_b"]
    Hf = np.empty((n, dh))
    Hb = np.empty((n, dh))
    cf, cb = [None] * n, [None] * n
    h = np.zeros(dh)
    for i in range(n):
        h, cf[i] = _gru_step(p["encf_U"], GXf[i], h)
        Hf[i] = h
    h = np.zeros(dh)
    for i in range(n - 1, -1, -1):
        h, cb[i] = _gru_step(p["encb_U"], GXb[i], h)
        Hb[i] = h
    H = np.concatenate([Hf, Hb], axis=1)
    red_in = np.concatenate([Hf[-1], Hb[0]])
    s0 = np.tanh(p["red_W"] @ red_in + p["red_b"])
    ext = np.asarray(src_ext if src_ext is not None else src_ids)
    n_ext = len(model.vocab) + len(oovs)
    if ext.shape != ids.shape or np.any(ext >= n_ext):
        raise ValueError("extended source ids inconsistent with the OOV list")
    return Encoded(H, H @ p["att_Wh"].T, s0, ext, n_ext, list(oovs),
                   cache=(ids, X, cf, cb, red_in))


def encode_tokens(model: PointerGenerator, tokens: Sequence[str]) -> Encoded:
    ids, ext, oovs = model.vocab.source_ids(tokens)
    return encode(model, ids, ext, oovs)


# --- decoder ----------------------------------------------------------------

@dataclass
class DecoderStepOutput:
    attention: np.ndarray
    p_gen: float
    vocab_dist: np.ndarray
    final_dist: np.ndarray
    coverage: np.ndarray


def mix_distributions(vocab_dist: np.ndarray, attention: np.ndarray, p_gen: float,
                      src_ext: Sequence[int], n_ext: int) -> np.ndarray:
    """Extended-vocabulary mixture of generation and copy distributions."""
    final = np.zeros(n_ext)
    final[: len(vocab_dist)] = p_gen * vocab_dist
    np.add.at(final, np.asarray(src_ext), (1.0 - p_gen) * attention)
    return final


def _input_id(model: PointerGenerator, token: int) -> int:
    return token if token < len(model.vocab) else UNK


def decode_step(model: PointerGenerator, state: np.ndarray, enc: Encoded, coverage: np.ndarray,
                prev_token: int, _cache: list | None = None) -> tuple[DecoderStepOutput, np.ndarray]:
    p = model.params
    if coverage.shape != (len(enc),):
        raise ValueError(f"coverage length {coverage.shape} != source length {len(enc)}")
    if state.shape != (model.d_h,):
        raise ValueError(f"decoder state shape {state.shape} != ({model.d_h},)")
    x = p["emb"][_input_id(model, prev_token)]
    s, gru_cache = _gru_step(p["dec_U"], p["dec_W"] @ x + p["dec_b"], state)
    g = np.tanh(enc.att_feat + p["att_Ws"] @ s + np.outer(coverage, p["att_wc"]) + p["att_b"])
    attn = _softmax(g @ p["att_v"])
    ctx = attn @ enc.states
    o = np.concatenate([s, ctx])
    pv = _softmax(p["out_W"] @ o + p["out_b"])
    p_gen = float(_sigmoid(p["gen_wctx"] @ ctx + p["gen_ws"] @ s + p["gen_wx"] @ x + p["gen_b"][0]))
    final = mix_distributions(pv, attn, p_gen, enc.src_ext, enc.n_ext)
    if _cache is not None:
        _cache.append((x, gru_cache, s, g, attn, ctx, o, pv, p_gen, coverage))
    return DecoderStepOutput(attn, p_gen, pv, final, coverage), s


# --- loss and gradients -----------------------------------------------------

@dataclass
class Example:
    src_ids: list
    src_ext: list
    oovs: list
    target: list  # extended ids, STOP-terminated


def make_example(vocab: Vocab, source: Sequence[str], target: Sequence[str]) -> Example:
    ids, ext, oovs = vocab.source_ids(source)
    return Example(ids, ext, oovs, vocab.target_ids(target, oovs))


def _forward(model: PointerGenerator, ex: Example, cov_weight: float):
    enc = encode(model, ex.src_ids, ex.src_ext, ex.oovs)
    coverage = np.zeros(len(enc))
    state = enc.init_state
    caches: list = []
    outputs = []
    prev = START
    nll = cov = 0.0
    for y in ex.target:
        out, state = decode_step(model, state, enc, coverage, prev, caches)
        outputs.append(out)
        nll -= np.log(out.final_dist[y])
        cov += np.minimum(out.attention, coverage).sum()
        coverage = coverage + out.attention
        prev = y
    T = len(ex.target)
    return (nll + cov_weight * cov) / T, enc, caches, outputs


def sequence_loss(model: PointerGenerator, ex: Example, cov_weight: float | None = None) -> float:
    if not ex.target:
        raise ValueError("empty target")
    w = model.config.cov_weight if cov_weight is None else cov_weight
    return float(_forward(model, ex, w)[0])


def step_outputs(model: PointerGenerator, ex: Example) -> list[DecoderStepOutput]:
    """Teacher-forced per-step outputs, for inspecting attention and coverage."""
    return _forward(model, ex, 0.0)[3]


def loss_and_grads(model: PointerGenerator, ex: Example,
                   cov_weight: float | None = None) -> tuple[float, dict[str, np.ndarray]]:
    w_cov = model.config.cov_weight if cov_weight is None else cov_weight
    loss, enc, caches, outputs = _forward(model, ex, w_cov)
    p = model.params
    grads = {k: np.zeros_like(v) for k, v in p.items()}
    V = len(model.vocab)
    T = len(ex.target)
    n = len(enc)
    dh = model.d_h
    src = enc.src_ext

    dH = np.zeros((n, 2 * dh))
    d_att_feat = np.zeros((n, dh))
    d_cov_later = np.zeros(n)  # gradient reaching coverage from steps after the current one
    ds_next = np.zeros(dh)
    d_logits_all = np.zeros((T, V))
    o_all = np.zeros((T, 3 * dh))
    d_dec_gx = np.zeros((T, 3 * dh))
    dec_x = np.zeros((T, model.config.d_e))
    dec_in = [START] + list(ex.target[:-1])

    for t in range(T - 1, -1, -1):
        x, gcache, s, g, attn, ctx, o, pv, pg, coverage = caches[t]
        y = ex.target[t]
        final_y = outputs[t].final_dist[y]
        gf = -1.0 / (T * final_y)

        d_attn = d_cov_later.copy()
        copy_mask = (src == y)
        d_attn += gf * (1.0 - pg) * copy_mask
        if w_cov:
            below = attn < coverage
            d_attn += (w_cov / T) * below
            d_cov_here = (w_cov / T) * (~below)
        else:
            d_cov_here = np.zeros(n)

        d_pv = np.zeros(V)
        if y < V:
            d_pv[y] = gf * pg
        d_pg = gf * ((pv[y] if y < V else 0.0) - attn[copy_mask].sum())

        d_logits = pv * (d_pv - d_pv @ pv)
        d_logits_all[t] = d_logits
        o_all[t] = o
        d_o = p["out_W"].T @ d_logits
        ds = ds_next + d_o[:dh]
        d_ctx = d_o[dh:]

        d_zg = d_pg * pg * (1.0 - pg)
        grads["gen_wctx"] += d_zg * ctx
        grads["gen_ws"] += d_zg * s
        grads["gen_wx"] += d_zg * x
        grads["gen_b"][0] += d_zg
        d_ctx += d_zg * p["gen_wctx"]
        ds += d_zg * p["gen_ws"]
        dx = d_zg * p["gen_wx"]

        d_attn += enc.states @ d_ctx
        dH += np.outer(attn, d_ctx)

        d_e = attn * (d_attn - d_attn @ attn)
        grads["att_v"] += g.T @ d_e
        d_pre = np.outer(d_e, p["att_v"]) * (1.0 - g * g)
        d_pre_sum = d_pre.sum(axis=0)
        d_att_feat += d_pre
        grads["att_Ws"] += np.outer(d_pre_sum, s)
        ds += p["att_Ws"].T @ d_pre_sum
        grads["att_wc"] += d_pre.T @ coverage
        grads["att_b"] += d_pre_sum
        d_cov_here = d_cov_here + d_pre @ p["att_wc"]

        d_gx, ds_next = _gru_step_back(p["dec_U"], ds, gcache, grads["dec_U"])
        d_dec_gx[t] = d_gx
        dec_x[t] = x
        dx += p["dec_W"].T @ d_gx
        grads["emb"][_input_id(model, dec_in[t])] += dx

        d_cov_later += d_cov_here

    grads["out_W"] += d_logits_all.T @ o_all
    grads["out_b"] += d_logits_all.sum(axis=0)
    grads["dec_W"] += d_dec_gx.T @ dec_x
    grads["dec_b"] += d_dec_gx.sum(axis=0)

    # initial decoder state
    d_red = ds_next * (1.0 - enc.init_state ** 2)
    ids, X, cf, cb, red_in = enc.cache
    grads["red_W"] += np.outer(d_red, red_in)
    grads["red_b"] += d_red
    d_red_in = p["red_W"].T @ d_red

    grads["att_Wh"] += d_att_feat.T @ enc.states
    dH += d_att_feat @ p["att_Wh"]
    dHf = dH[:, :dh].copy()
    dHb = dH[:, dh:].copy()
    dHf[-1] += d_red_in[:dh]
    dHb[0] += d_red_in[dh:]

    dGXf = np.zeros((n, 3 * dh))
    dh_run = np.zeros(dh)
    for i in range(n - 1, -1, -1):
        dGXf[i], dh_run = _gru_step_back(p["encf_U"], dHf[i] + dh_run, cf[i], grads["encf_U"])
    dGXb = np.zeros((n, 3 * dh))
    dh_run = np.zeros(dh)
    for i in range(n):
        dGXb[i], dh_run = _gru_step_back(p["encb_U"], dHb[i] + dh_run, cb[i], grads["encb_U"])
    grads["encf_W"] += dGXf.T @ X
    grads["encf_b"] += dGXf.sum(axis=0)
    grads["encb_W"] += dGXb.T @ X
    grads["encb_b"] += dGXb.sum(axis=0)
    dX = dGXf @ p["encf_W"] + dGXb @ p["encb_W"]
    np.add.at(grads["emb"], ids, dX)
    return float(loss), grads


# --- persistence ------------------------------------------------------------

def save_model(model: PointerGenerator, path: str | Path) -> None:
    meta = {"vocab": model.vocab.words, "config": asdict(model.config),
            "shapes": {k: list(v.shape) for k, v in model.params.items()}}
    write_blob(path, MAGIC, meta, model.params)


def load_model(path: str | Path) -> PointerGenerator:
    meta, arrays = read_blob(path, MAGIC)
    model = PointerGenerator(Vocab(meta["vocab"]), ModelConfig(**meta["config"]), arrays)
    for name, shape in meta["shapes"].items():
        if list(model.params[name].shape) != shape:
            raise ValueError(f"{name}: stored shape {shape} does not match array")
    return model
