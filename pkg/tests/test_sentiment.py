import math
import random

import pytest
import requests
from hypothesis import given, settings
from hypothesis import strategies as st

from archivebias.errors import EmptyList, EmptySentence, SentimentServiceError
from archivebias.sentiment import (
    DEFAULT_BOOSTERS,
    NEUTRAL,
    SentimentServiceClient,
    SentimentTriple,
    VaderEngine,
    aggregate,
    load_lexicon,
    parse_lexicon,
    tokenize,
)

vader = pytest.importorskip("vaderSentiment.vaderSentiment")

LEX = load_lexicon()
ENGINE = VaderEngine(LEX)

NEUTRAL_WORDS = "the committee met on tuesday students faculty said campus report event hall city of and to".split()
NEGATORS = ["not", "never", "isn't", "without", "no", "nor", "or"]
BOOSTERS = ["very", "extremely", "slightly", "barely", "so", "this", "least", "at", "kind", "of"]


@pytest.fixture(scope="module")
def reference():
    sia = vader.SentimentIntensityAnalyzer()
    sia.lexicon = dict(LEX.valences)
    return sia


def random_sentence(rng: random.Random, with_but: bool = False) -> str:
    vocab = list(LEX.valences)
    words = []
    for _ in range(rng.randint(1, 14)):
        r = rng.random()
        if r < 0.35:
            w = rng.choice(vocab)
        elif r < 0.7:
            w = rng.choice(NEUTRAL_WORDS)
        elif r < 0.85:
            w = rng.choice(NEGATORS)
        else:
            w = rng.choice(BOOSTERS)
        if rng.random() < 0.12:
            w = w.upper()
        if rng.random() < 0.1:
            w += rng.choice([",", ".", "!", "?", "!!"])
        words.append(w)
    if with_but:
        words.insert(rng.randrange(len(words) + 1), "but")
    return " ".join(words)


def test_hand_computed_positive():
    # One +1.9 token among five neutral ones: pos = 2.9 / (2.9 + 5).
    t = ENGINE.sentence_sentiment("We all thought it was good")
    assert t.pos == pytest.approx(2.9 / 7.9, abs=1e-12)
    assert t.neg == 0.0
    assert t.neu == pytest.approx(5 / 7.9, abs=1e-12)


def test_negation_flips_valence():
    # 1.9 * -0.74 = -1.406; neg = 2.406 / (2.406 + 3)
    t = ENGINE.sentence_sentiment("It was not good")
    assert t.pos == 0.0
    assert t.neg == pytest.approx(2.406 / 5.406, abs=1e-12)


def test_booster_and_caps():
    vals = ENGINE.valences("The food was VERY good")
    # caps booster: 0.293 + 0.733 added to 1.9
    assert vals[-1] == pytest.approx(1.9 + 0.293 + 0.733)
    assert ENGINE.valences("the food was very good")[-1] == pytest.approx(1.9 + 0.293)


def test_but_rule_weights_clauses():
    vals = ENGINE.valences("good but bad")
    assert vals[0] == pytest.approx(1.9 * 0.5)
    assert vals[2] == pytest.approx(LEX.valences["bad"] * 1.5)


def test_no_lexicon_words_is_neutral():
    assert ENGINE.sentence_sentiment("The committee met on Tuesday.") == NEUTRAL


def test_empty_sentence_rejected():
    with pytest.raises(EmptySentence):
        ENGINE.scores("   ")


def test_tokenize_keeps_short_punctuated_tokens():
    assert tokenize("Great :) food!!") == ["Great", ":)", "food"]


def test_bundled_lexicon_subset_of_reference(reference):
    full = vader.SentimentIntensityAnalyzer().lexicon
    assert LEX.valences.keys() <= full.keys()
    assert all(full[k] == v for k, v in LEX.valences.items())
    assert dict(DEFAULT_BOOSTERS) == dict(vader.BOOSTER_DICT)


def test_matches_reference_on_random_sentences(reference):
    rng = random.Random(7)
    mismatches = []
    for _ in range(3000):
        s = random_sentence(rng)
        ours = ENGINE.scores(s)
        ref = reference.polarity_scores(s)
        got = (ours.triple.pos, ours.triple.neg, ours.triple.neu)
        want = (ref["pos"], ref["neg"], ref["neu"])
        if any(abs(a - b) > 1e-3 for a, b in zip(got, want)) or abs(ours.compound - ref["compound"]) > 1e-3:
            mismatches.append((s, got, want))
    assert not mismatches, mismatches[:5]


@pytest.mark.parametrize(
    "sentence",
    [
        "The talk was good but the crowd was hostile",
        "Nobody was happy but the result was a success",
        "We hoped for peace, but the war continued!",
    ],
)
def test_matches_reference_on_but_sentences(reference, sentence):
    # Distinct valences only: the reference locates clause words by value,
    # which misfires when the same valence appears on both sides of "but".
    ours = ENGINE.sentence_sentiment(sentence)
    ref = reference.polarity_scores(sentence)
    assert ours.pos == pytest.approx(ref["pos"], abs=1e-3)
    assert ours.neg == pytest.approx(ref["neg"], abs=1e-3)
    assert ours.neu == pytest.approx(ref["neu"], abs=1e-3)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.sampled_from(sorted(LEX.valences) + NEUTRAL_WORDS + NEGATORS + BOOSTERS + ["but", "!", "?"]), min_size=1, max_size=25))
def test_triple_is_a_distribution(words):
    t = ENGINE.sentence_sentiment(" ".join(words))
    assert all(0.0 <= c <= 1.0 for c in (t.pos, t.neg, t.neu))
    assert abs(t.pos + t.neg + t.neu - 1.0) <= 1e-6


@settings(max_examples=300, deadline=None)
@given(st.text(min_size=1).filter(lambda s: s.strip()))
def test_arbitrary_text_yields_distribution(text):
    t = ENGINE.sentence_sentiment(text)
    assert abs(t.pos + t.neg + t.neu - 1.0) <= 1e-6


def test_aggregate_is_componentwise_mean():
    a = SentimentTriple(0.2, 0.3, 0.5)
    b = SentimentTriple(0.0, 0.1, 0.9)
    m = aggregate([a, b])
    assert (m.pos, m.neg, m.neu) == pytest.approx((0.1, 0.2, 0.7))
    with pytest.raises(EmptyList):
        aggregate([])


def test_triple_validation():
    with pytest.raises(ValueError):
        SentimentTriple(0.5, 0.5, 0.5)
    with pytest.raises(ValueError):
        SentimentTriple(-0.1, 0.6, 0.5)


def test_parse_lexicon_ignores_comments_and_extra_columns():
    lex = parse_lexicon(["# header", "", "nice\t1.8\t0.6\t[2, 2]", "grim\t-2.1"])
    assert lex.valences == {"nice": 1.8, "grim": -2.1}
    with pytest.raises(ValueError):
        parse_lexicon(["broken line"])


class _Resp:
    def __init__(self, payload, status=200):
        self.payload, self.status_code = payload, status

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"HTTP {self.status_code}")

    def json(self):
        if isinstance(self.payload, Exception):
            raise self.payload
        return self.payload


class _Session:
    def __init__(self, resp):
        self.resp, self.calls = resp, []

    def post(self, url, json=None, timeout=None):
        self.calls.append(json)
        return self.resp


def test_service_client_renormalizes_rounded_scores():
    session = _Session(_Resp({"pos": 0.333, "neg": 0.333, "neu": 0.333, "compound": 0.1}))
    t = SentimentServiceClient("http://svc/score", session=session).sentence_sentiment("hello there")
    assert math.isclose(t.pos + t.neg + t.neu, 1.0)
    assert session.calls == [{"text": "hello there"}]


@pytest.mark.parametrize("resp", [_Resp({"pos": 1}), _Resp({}, status=500), _Resp(ValueError("not json"))])
def test_service_client_failures(resp):
    with pytest.raises(SentimentServiceError):
        SentimentServiceClient("http://svc/score", session=_Session(resp)).sentence_sentiment("x y")
