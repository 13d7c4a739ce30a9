import pytest
from hypothesis import given
from hypothesis import strategies as st

from dialsumm.corpus import (LEXICON, POS_TAGS, SUFFIX_RULES, Conversation, CorpusFormatError, SummaryExample,
                             TagSet, UnknownTagError, Utterance, default_tagset, fallback_pos_tag,
                             load_conversations, parse_conversations, parse_summary_examples, parse_tagset,
                             serialize_conversations, serialize_summary_examples, serialize_tagset, tokenize)


def test_empty_file_gives_no_conversations(tmp_path):
    path = tmp_path / "empty.tsv"
    path.write_text("")
    assert load_conversations(path, default_tagset()) == []


def test_comments_only_is_empty():
    assert parse_conversations(["# nothing\n", "\n"]) == []


def test_round_trip_matches_canonical_form(data_dir):
    convs = load_conversations(data_dir / "three_convs_raw.tsv", default_tagset())
    assert [c.id for c in convs] == ["c1", "c2", "c3"]
    expected = (data_dir / "three_convs_canonical.tsv").read_text()
    assert serialize_conversations(convs) == expected
    # canonical form is a fixed point
    assert serialize_conversations(parse_conversations(expected.splitlines(True))) == expected


def test_loaded_fields(data_dir):
    c1, c2, _ = load_conversations(data_dir / "three_convs_raw.tsv", default_tagset())
    assert c1.utterances[2].pos_tags[0] == "INTJ"
    assert c1.utterances[1].tokens == ("do", "you", "like", "dogs", "?")
    assert c2.utterances[1].da_tag is None


def test_bundled_tagset_has_43_tags():
    ts = default_tagset()
    assert len(ts) == 43
    for tag in ("fp", "fc", "x", "%", "t1"):
        assert ts.role(tag) == "removable"


def test_unknown_tag_is_rejected():
    line = "c1\t0\tA\txyz\thello\n"
    with pytest.raises(UnknownTagError) as err:
        parse_conversations([line], default_tagset())
    assert err.value.tag == "xyz"
    assert err.value.lineno == 1
    assert "xyz" in str(err.value)


@pytest.mark.parametrize("lines, lineno", [
    (["c1\t0\tA\tsd\n"], 1),                                   # too few fields
    (["c1\t0\tA\tsd\thi\n", "c1\t2\tA\tsd\tho\n"], 2),          # index gap
    (["c1\tzero\tA\tsd\thi\n"], 1),                            # bad index
    (["c1\t0\tA\tsd\thi\n", "c2\t0\tA\tsd\thi\n", "c1\t1\tA\tsd\thi\n"], 3),  # non-contiguous
    (["c1\t0\tA\tsd\thi there\tINTJ\n"], 1),                   # POS count mismatch
    (["c1\t0\tA\tsd\t...?\n", "c1\t1\tA\tsd\t\n"], 2),         # no tokens
])
def test_parse_errors_carry_line_numbers(lines, lineno):
    with pytest.raises(CorpusFormatError) as err:
        parse_conversations(lines, default_tagset())
    assert err.value.lineno == lineno
    assert f"line {lineno}" in str(err.value)


def test_tokenize_examples():
    assert tokenize("") == []
    assert tokenize("I like dogs.") == ["i", "like", "dogs", "."]
    assert tokenize("don't") == ["don", "'", "t"]
    assert tokenize("Wait...what?!") == ["wait", ".", ".", ".", "what", "?", "!"]


@given(st.text())
def test_tokenize_idempotent(raw):
    toks = tokenize(raw)
    assert tokenize(" ".join(toks)) == toks


def test_fallback_pos_examples():
    assert fallback_pos_tag([]) == []
    assert fallback_pos_tag(["."]) == ["PUNCT"]
    # "running" is not in the lexicon, so the -ing suffix rule decides
    assert "running" not in LEXICON
    assert SUFFIX_RULES[0] == ("ing", "VERB")
    assert fallback_pos_tag(["running"]) == ["VERB"]
    assert fallback_pos_tag(["the", "42", "quickly", "zxq"]) == ["DET", "NUM", "ADV", "OTHER"]


@given(st.lists(st.text(min_size=1, max_size=8), max_size=20))
def test_fallback_pos_length_and_tagset(tokens):
    tags = fallback_pos_tag(tokens)
    assert len(tags) == len(tokens)
    assert set(tags) <= set(POS_TAGS)


# --- generated conversations ------------------------------------------------

_TS = default_tagset()
_words = st.text(alphabet="abcdefghij", min_size=1, max_size=6)


@st.composite
def conversations(draw):
    n = draw(st.integers(1, 6))
    utts = []
    for i in range(n):
        raw = draw(st.lists(st.one_of(_words, st.sampled_from([".", "?", ",", "'"])), min_size=1, max_size=8))
        if all(not any(ch.isalnum() for ch in w) for w in raw):
            raw.append("ok")
        tokens = tokenize(" ".join(raw))
        pos = draw(st.one_of(st.none(), st.just(fallback_pos_tag(tokens))))
        tag = draw(st.one_of(st.none(), st.sampled_from(_TS.tags)))
        speaker = draw(st.sampled_from(["A", "B", "spk3"]))
        utts.append(Utterance(speaker, tokens, pos, tag, i))
    return Conversation(draw(st.sampled_from(["c1", "conv-x", "42"])), utts)


@given(st.lists(conversations(), max_size=4, unique_by=lambda c: c.id))
def test_conversation_round_trip(convs):
    assert parse_conversations(serialize_conversations(convs).splitlines(True), _TS) == convs


def test_utterance_invariants():
    with pytest.raises(ValueError):
        Utterance("A", [])
    with pytest.raises(ValueError):
        Utterance("A", ["a", "b"], ["NOUN"])
    with pytest.raises(ValueError):
        Conversation("c", [Utterance("A", ["x"], index=1)])
    with pytest.raises(ValueError):
        Conversation("c", [])


def test_tagset_file_round_trip():
    ts = default_tagset()
    assert parse_tagset(serialize_tagset(ts).splitlines()) == ts
    with pytest.raises(CorpusFormatError):
        parse_tagset(["sd\tnonsense"])
    with pytest.raises(CorpusFormatError):
        parse_tagset(["sd\tstatement", "sd\tother"])
    with pytest.raises(ValueError):
        TagSet(("a", "a"), {"a": "other"})


SUMMARY_FILE = """\
source art1
The cat sat on the mat.
It was happy.
ref-1
A cat sat.
ref-2
The cat was happy.
===
source
Dogs bark.
ref-1
dogs bark
"""


def test_summary_examples_parse_and_round_trip():
    exs = parse_summary_examples(SUMMARY_FILE.splitlines())
    assert len(exs) == 2
    assert exs[0].id == "art1"
    assert exs[0].source_text[:3] == ("the", "cat", "sat")
    assert exs[0].references == (("a", "cat", "sat", "."), ("the", "cat", "was", "happy", "."))
    again = parse_summary_examples(serialize_summary_examples(exs).splitlines())
    assert again == exs


@pytest.mark.parametrize("text", [
    "source\nhello\n",                      # no references
    "ref-1\nhello\n",                       # no source
    "source\nx\nref-2\ny\n",                # bad numbering
    "stray\nsource\nx\nref-1\ny\n",         # text before header
])
def test_summary_examples_reject_malformed(text):
    with pytest.raises(CorpusFormatError):
        parse_summary_examples(text.splitlines())


def test_summary_example_needs_reference():
    with pytest.raises(ValueError):
        SummaryExample(("a",), ())
