import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pgen_helpers import check_distributions, random_tokens, tiny_model
from dialsumm.pointer_gen import (STOP, UNK, PointerGenerator, TrainConfig, Vocab, beam_search,
                                  beam_search_decode, build_vocab, clip_by_global_norm, decode_step, encode,
                                  encode_tokens, greedy_decode, greedy_search, load_model, loss_and_grads,
                                  make_example, mix_distributions, model_step_fn, save_model, sequence_loss,
                                  step_outputs, train)
from dialsumm.pointer_gen.vocab import RESERVED

# --- vocab --------------------------------------------------------------------

def test_build_vocab_examples():
    assert build_vocab([["a", "a", "b"]], 6).words == list(RESERVED) + ["a", "b"]
    assert build_vocab([["a", "a", "b"]], 5).words == list(RESERVED) + ["a"]
    assert build_vocab([["b", "a"]], 5).words == list(RESERVED) + ["a"]
    with pytest.raises(ValueError):
        build_vocab([], 6)
    with pytest.raises(ValueError):
        build_vocab([["a"]], 4)


def test_vocab_rejects_duplicates_and_bad_reserved():
    with pytest.raises(ValueError):
        Vocab(list(RESERVED) + ["a", "a"])
    with pytest.raises(ValueError):
        Vocab(["a"] + list(RESERVED))


def test_oov_ids():
    v = Vocab(list(RESERVED) + ["a"])
    ids, ext, oovs = v.source_ids(["a", "x", "y", "x"])
    assert ids == [4, UNK, UNK, UNK] and ext == [4, 5, 6, 5] and oovs == ["x", "y"]
    assert v.target_ids(["y", "w", "a"], oovs) == [6, UNK, 4, STOP]
    assert v.to_words([4, 6, 5], oovs) == ["a", "y", "x"]


# --- encoder --------------------------------------------------------------------

def test_encode_shapes_and_determinism():
    m = tiny_model(0)
    enc = encode_tokens(m, ["a"])
    assert enc.states.shape == (1, 12)
    e1, e2 = encode_tokens(m, ["a", "b", "zz"]), encode_tokens(tiny_model(0), ["a", "b", "zz"])
    assert np.all(np.isfinite(e1.states))
    assert np.array_equal(e1.states, e2.states) and np.array_equal(e1.init_state, e2.init_state)


def test_encode_errors():
    m = tiny_model(0)
    with pytest.raises(ValueError):
        encode(m, [])
    with pytest.raises(ValueError):
        encode(m, [len(m.vocab)])


def test_nonfinite_params_rejected():
    m = tiny_model(0)
    bad = dict(m.params)
    bad["emb"] = bad["emb"].copy()
    bad["emb"][0, 0] = np.nan
    with pytest.raises(ValueError):
        PointerGenerator(m.vocab, m.config, bad)


# --- decoder step -----------------------------------------------------------------

def test_single_source_token_full_attention():
    m = tiny_model(3)
    enc = encode_tokens(m, ["c"])
    out, _ = decode_step(m, enc.init_state, enc, np.zeros(1), 2)
    assert out.attention.tolist() == [1.0]


def test_mixture_hand_example():
    # vocab {a, b} (ids 0, 1), source [a, c] with c out of vocabulary (id 2)
    final = mix_distributions(np.array([0.6, 0.4]), np.array([0.5, 0.5]), 0.5, [0, 2], 3)
    assert final == pytest.approx([0.55, 0.20, 0.25], abs=1e-15)


def test_forced_generation_equals_vocab_dist():
    pv = np.array([0.1, 0.2, 0.7])
    assert np.array_equal(mix_distributions(pv, np.array([0.3, 0.7]), 1.0, [0, 3], 4), np.append(pv, 0.0))


def test_decode_step_dimension_errors():
    m = tiny_model(0)
    enc = encode_tokens(m, ["a", "b"])
    with pytest.raises(ValueError):
        decode_step(m, enc.init_state, enc, np.zeros(3), 2)
    with pytest.raises(ValueError):
        decode_step(m, np.zeros(5), enc, np.zeros(2), 2)


@settings(max_examples=50)
@given(st.integers(0, 2 ** 31), st.integers(1, 8), st.integers(1, 6))
def test_distribution_invariants(seed, n_src, n_tgt):
    rng = np.random.default_rng(seed)
    check_distributions(tiny_model(seed, scale=float(rng.uniform(0.05, 2.0))),
                        random_tokens(rng, n_src), random_tokens(rng, n_tgt))


# --- loss -------------------------------------------------------------------------

def test_two_equal_attentions_penalty():
    # zero scoring vector gives uniform attention (0.5, 0.5) at every step
    m = tiny_model(1)
    p = {k: v.copy() for k, v in m.params.items()}
    p["att_v"][:] = 0.0
    m = PointerGenerator(m.vocab, m.config, p)
    ex = make_example(m.vocab, ["a", "b"], ["c"])
    outs = step_outputs(m, ex)
    assert [o.attention.tolist() for o in outs] == [[0.5, 0.5], [0.5, 0.5]]
    assert np.minimum(outs[1].attention, outs[1].coverage).sum() == 1.0
    assert sequence_loss(m, ex, 1.0) - sequence_loss(m, ex, 0.0) == pytest.approx(0.5, abs=1e-12)


def test_loss_matches_definition():
    m = tiny_model(2)
    ex = make_example(m.vocab, ["a", "zz", "b"], ["zz", "c", "yy"])
    outs = step_outputs(m, ex)
    terms = [-np.log(o.final_dist[y]) + 0.7 * np.minimum(o.attention, o.coverage).sum()
             for o, y in zip(outs, ex.target)]
    assert sequence_loss(m, ex, 0.7) == pytest.approx(np.mean(terms), rel=1e-12)
    assert ex.target == [len(m.vocab), m.vocab.id("c"), UNK, STOP]


def test_perfect_prediction_zero_loss():
    # an all-copy model with one source token predicts it with probability 1
    m = tiny_model(0)
    p = {k: v.copy() for k, v in m.params.items()}
    p["gen_b"][:] = -1e4
    m = PointerGenerator(m.vocab, m.config, p)
    ex = make_example(m.vocab, ["a"], ["a"])
    ex.target = ex.target[:-1]  # drop STOP, which copy cannot produce
    assert sequence_loss(m, ex, 0.0) == 0.0


def test_empty_target_rejected():
    m = tiny_model(0)
    ex = make_example(m.vocab, ["a"], [])
    ex.target = []
    with pytest.raises(ValueError):
        sequence_loss(m, ex)


def gradient_errors(seed, source=("a", "zz", "b"), target=("zz", "c")):
    m = tiny_model(seed)
    ex = make_example(m.vocab, list(source), list(target))
    _, grads = loss_and_grads(m, ex, 1.0)
    names = sorted(m.params)
    flat = np.concatenate([m.params[k].ravel() for k in names])

    def f(x):
        params, k0 = {}, 0
        for k in names:
            size = m.params[k].size
            params[k] = x[k0:k0 + size].reshape(m.params[k].shape)
            k0 += size
        return sequence_loss(PointerGenerator(m.vocab, m.config, params), ex, 1.0)

    numeric = oracles.central_differences(f, flat)
    analytic = np.concatenate([grads[k].ravel() for k in names])
    return oracles.relative_error(analytic, numeric)


def test_gradient_check_one_seed():
    assert gradient_errors(0).max() < 1e-3


# --- training ---------------------------------------------------------------------

def test_zero_steps_leaves_params():
    m = tiny_model(0)
    out = train(m, [(["a", "b"], ["a"])], TrainConfig(steps=0))
    assert all(np.array_equal(out.params[k], m.params[k]) for k in m.params)


def test_training_deterministic_and_not_in_place():
    m = tiny_model(0)
    before = {k: v.copy() for k, v in m.params.items()}
    data = [(["a", "b", "zz"], ["zz", "a"]), (["c", "d"], ["c"])]
    cfg = TrainConfig(steps=5, batch_size=2)
    a, b = train(m, data, cfg), train(m, data, cfg)
    assert all(np.array_equal(a.params[k], b.params[k]) for k in m.params)
    assert all(np.array_equal(m.params[k], before[k]) for k in m.params)


def test_training_reduces_loss():
    m = tiny_model(0, d_e=8, d_h=8)
    data = [(["a", "b", "c"], ["a"]), (["d", "e", "f"], ["d"]), (["b", "c", "a"], ["b"])]
    exs = [make_example(m.vocab, s, t) for s, t in data]
    before = np.mean([sequence_loss(m, e) for e in exs])
    trained = train(m, data, TrainConfig(steps=100, batch_size=3, learning_rate=0.02))
    assert np.mean([sequence_loss(trained, e) for e in exs]) < 0.5 * before


def test_train_errors():
    m = tiny_model(0)
    with pytest.raises(ValueError):
        train(m, [], TrainConfig(steps=1))
    with pytest.raises(ValueError):
        train(m, [([], ["a"])], TrainConfig(steps=1))


def test_clip_by_global_norm():
    g = {"x": np.array([3.0, 0.0]), "y": np.array([[4.0]])}
    assert clip_by_global_norm(g, 2.0) == 5.0
    assert np.allclose(np.sqrt(sum(np.sum(v * v) for v in g.values())), 2.0)
    small = {"x": np.array([0.1])}
    clip_by_global_norm(small, 2.0)
    assert small["x"][0] == 0.1


# --- beam search ---------------------------------------------------------------------

def table_step(table, size=14):
    """Step function over a fixed table keyed by the emitted prefix."""
    def step(prefix, token):
        prefix = prefix + (token,) if token != 2 else prefix
        lp = np.full(size, -np.inf)
        for tok, prob in table.get(prefix, {STOP: 1.0}).items():
            lp[tok] = np.log(prob)
        return lp, prefix
    return step


def test_beam_beats_greedy_on_table():
    first = {4: 0.6, 5: 0.4}
    after_4 = {k: 0.1 for k in range(4, 14)}
    after_5 = {4: 0.9, 5: 0.1}
    step = table_step({(): first, (4,): after_4, (5,): after_5})
    assert greedy_search(step, (), max_len=2, min_len=2) == [4, 4]
    assert beam_search(step, (), beam_width=2, max_len=2, min_len=2) == [5, 4]


def test_beam_min_len_masks_stop():
    step = table_step({(): {STOP: 0.9, 4: 0.1}, (4,): {STOP: 0.9, 5: 0.1}, (4, 5): {STOP: 0.9, 4: 0.1}})
    assert beam_search(step, (), 2, max_len=5, min_len=2) == [4, 5]
    assert beam_search(step, (), 2, max_len=5, min_len=1) == [4]


def test_beam_argument_checks():
    step = table_step({})
    with pytest.raises(ValueError):
        beam_search(step, (), 0, 5, 1)
    with pytest.raises(ValueError):
        beam_search(step, (), 2, 3, 4)


@settings(max_examples=25)
@given(st.integers(0, 2 ** 31), st.integers(1, 6), st.integers(1, 4), st.integers(0, 4))
def test_beam_properties_on_random_models(seed, n_src, min_len, extra):
    rng = np.random.default_rng(seed)
    m = tiny_model(seed, scale=1.0)
    src = random_tokens(rng, n_src)
    max_len = min_len + extra
    one = beam_search_decode(m, src, 1, max_len, min_len)
    assert one == greedy_decode(m, src, max_len, min_len)
    four = beam_search_decode(m, src, 4, max_len, min_len)
    assert min_len <= len(four) <= max_len
    assert four == beam_search_decode(m, src, 4, max_len, min_len)


@settings(max_examples=25)
@given(st.integers(0, 2 ** 31))
def test_unk_masked_when_copy_at_least_as_likely(seed):
    rng = np.random.default_rng(seed)
    m = tiny_model(seed, scale=2.0)
    src = random_tokens(rng, 5)
    enc = encode_tokens(m, src)
    step, state, oovs = model_step_fn(m, src)
    token = 2
    for _ in range(4):
        lp, new_state = step(state, token)
        raw, _ = decode_step(m, state[0], enc, state[1], token)
        copy_wins = bool(oovs) and raw.final_dist[len(m.vocab):].max() >= raw.final_dist[UNK]
        assert (lp[UNK] == -np.inf) == copy_wins
        state, token = new_state, int(np.argmax(lp))


def forced_model(gen_bias, unk_bias):
    m = tiny_model(0)
    p = {k: v.copy() for k, v in m.params.items()}
    p["gen_b"][:] = gen_bias
    p["out_b"][UNK] = unk_bias
    return PointerGenerator(m.vocab, m.config, p)


def test_unk_rule_extremes():
    src = ["zz", "a"]
    # copy dominates: the OOV beats UNK, so UNK is masked
    step, init, _ = model_step_fn(forced_model(-50.0, 50.0), src)
    lp, _ = step(init, 2)
    assert lp[UNK] == -np.inf
    # generation dominates with UNK favoured: UNK stays available and wins
    m = forced_model(50.0, 50.0)
    step, init, _ = model_step_fn(m, src)
    lp, _ = step(init, 2)
    assert np.isfinite(lp[UNK]) and int(np.argmax(lp)) == UNK
    assert greedy_decode(m, src, 3, 1) == ["<unk>"] * 3


# --- model file -------------------------------------------------------------------

def test_model_file_round_trip(tmp_path):
    m = tiny_model(5)
    path = tmp_path / "m.pgen"
    save_model(m, path)
    back = load_model(path)
    assert back.vocab == m.vocab and back.config == m.config
    assert all(np.array_equal(back.params[k], m.params[k]) for k in m.params)
    assert path.read_bytes().startswith(b"PGEN/1")


def test_model_file_bad_magic(tmp_path):
    path = tmp_path / "m.bin"
    path.write_bytes(b"CRFMODEL/1\nxxxx")
    with pytest.raises(ValueError, match="PGEN/1"):
        load_model(path)


def test_copy_task_smoothed_loss_decreases(copy_task_run):
    # window-10 running mean, sampled every 50 steps over the first 500
    _, losses, _ = copy_task_run
    smoothed = np.convolve(losses[:500], np.ones(10) / 10, mode="valid")
    samples = smoothed[::50]
    assert len(samples) == 10
    assert np.all(np.diff(samples) < 0)
