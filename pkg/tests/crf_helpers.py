from dialsumm import crf
from dialsumm.corpus import Conversation, TagSet, Utterance

WORDS = ["yes", "no", "dog", "cat", "what", "think", "okay", "bye"]


def tagset_of(k):
    tags = tuple(f"t{i}" for i in range(k))
    return TagSet(tags, {t: "other" for t in tags})


def random_conversation(rng, n, tagset=None):
    utts = []
    for i in range(n):
        words = [WORDS[j] for j in rng.integers(0, len(WORDS), size=int(rng.integers(1, 4)))]
        tag = tagset.tags[int(rng.integers(len(tagset)))] if tagset is not None else None
        utts.append(Utterance("AB"[int(rng.integers(2))], words, None, tag, i))
    return Conversation("r", utts)


def random_model(rng, k, convs, scale=1.0):
    ts = tagset_of(k)
    feats = crf.build_feature_dict(convs)
    model = crf.CrfModel.zeros(ts, feats)
    model.emission[:] = rng.normal(0, scale, model.emission.shape)
    model.transition[:] = rng.normal(0, scale, model.transition.shape)
    return model
