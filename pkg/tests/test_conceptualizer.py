import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chi2_contingency

from lingdist.conceptualizer import (
    PAD_LABEL,
    ConceptQuery,
    ConceptualizerConfig,
    align,
    association_score,
    backward_pass,
    build_concept_vector,
    char_ngrams,
    chi_square_counts,
    conceptualize,
    fix_dimension_labels,
    forward_pass,
)
from lingdist.errors import ConceptNotInSource, InvalidValue
from lingdist.ingest import parse_concept_vectors, to_text, write_concept_vectors

from helpers import corpus_from, independent_corpus, kou_corpus, perfect_corpus, random_corpus, split_corpus
from oracles import brute_greedy, exact_chi2, index_picks


def _same_picks(got, want):
    assert [g for g, _ in got] == [g for g, _ in want]
    for (_, a), (_, b) in zip(got, want):
        assert a == pytest.approx(b, rel=1e-12)


# -- statistic ---------------------------------------------------------------

def test_association_hand_value():
    u = range(10)
    assert association_score(range(5), range(5), u) == 10.0


def test_association_degenerate():
    assert association_score({0, 1}, {2, 3}, range(10)) == 0.0
    assert association_score(range(10), {1, 2}, range(10)) == 0.0
    assert association_score(set(), {1}, range(10)) == 0.0


@settings(max_examples=200)
@given(st.integers(2, 60).flatmap(lambda n: st.tuples(
    st.just(n), st.sets(st.integers(0, n - 1)), st.sets(st.integers(0, n - 1)))))
def test_association_matches_scipy_and_is_symmetric(case):
    n, a, b = case
    score = association_score(a, b, range(n))
    assert score == association_score(b, a, range(n))
    n11 = len(a & b)
    table = np.array([[n11, len(a) - n11], [len(b) - n11, n - len(a) - len(b) + n11]])
    if 0 < len(a) < n and 0 < len(b) < n and n11 * n > len(a) * len(b):
        expected = chi2_contingency(table, correction=False)[0]
        assert score == pytest.approx(expected, rel=1e-9)
    else:
        assert score == 0.0
    assert score == pytest.approx(float(exact_chi2(n11, len(a), len(b), n)), rel=1e-12)


def test_chi_square_counts_float_order_matches_vector():
    from lingdist.conceptualizer import _chi_square_vector
    rng = np.random.default_rng(3)
    n = 47
    nb = 13
    na = rng.integers(0, n + 1, 500)
    n11 = np.minimum(na, rng.integers(0, nb + 1, 500))
    vec = _chi_square_vector(n11, na, nb, n)
    scalar = [chi_square_counts(int(x), int(y), nb, n) for x, y in zip(n11, na)]
    assert vec.tolist() == scalar


def test_char_ngrams_are_marked_and_bounded():
    assert char_ngrams("ab", 1, 10) == {"·", "a", "b", "·a", "ab", "b·", "·ab", "ab·", "·ab·"}
    assert char_ngrams("abc de", 4, 4) == {"·abc", "abc·", "·de·"}


# -- fixtures from the operation examples --------------------------------------

def _query(word="mouth", name="mouth"):
    return ConceptQuery(name, (word,), "eng")


def test_perfect_correlate_forward_and_backward():
    corpus = perfect_corpus()
    fwd = forward_pass(corpus, _query(), "tgt")
    assert fwd == (("xq", 20.0),)
    assert backward_pass(corpus, ["xq"], "tgt", "eng") == (("mouth", 20.0),)
    labels = ("mouth", *[PAD_LABEL] * 99)
    v = build_concept_vector(corpus, _query(), "tgt", labels)
    assert v[0] == 1.0 and not v[1:].any()


def test_independent_target_gives_nothing():
    corpus = independent_corpus()
    assert forward_pass(corpus, _query(), "tgt") == ()
    labels = ("mouth", *[PAD_LABEL] * 99)
    assert not build_concept_vector(corpus, _query(), "tgt", labels).any()


def test_split_realizations_both_found_in_score_order():
    fwd = forward_pass(split_corpus(), _query(), "tgt")
    assert [g for g, _ in fwd] == ["zv", "xq"]
    assert fwd[0][1] == pytest.approx(20.0) and fwd[1][1] == pytest.approx(20 / 3)
    assert fwd[0][1] > fwd[1][1]


@pytest.mark.parametrize("make", [perfect_corpus, independent_corpus, split_corpus])
def test_fixtures_match_oracle(make):
    corpus = make()
    cfg = ConceptualizerConfig()
    want, _ = brute_greedy(corpus, "eng", ["mouth"], "tgt", cfg, cfg.max_targets)
    _same_picks(index_picks(corpus, "eng", ["mouth"], "tgt", cfg, cfg.max_targets), want)


def test_kou_retrieves_mouth_and_entrance():
    corpus = kou_corpus()
    result = align(corpus, _query(), "zh")
    assert [g for g, _ in result.target_strings] == ["xq"]
    back = dict(result.backward_concepts)
    assert back["mouth"] == pytest.approx(40.0)
    assert back["entrance"] == pytest.approx(40 / 3)
    labels = fix_dimension_labels(corpus, _query(), ["zh"])
    assert labels[:3] == ("mouth", "entrance", PAD_LABEL)
    v = build_concept_vector(corpus, _query(), "zh", labels)
    assert v[0] == 1.0 and v[1] == 1.0 and np.count_nonzero(v) == 2
    # en2 keeps the two concepts apart
    v2 = build_concept_vector(corpus, _query(), "en2", labels)
    assert v2[0] == 1.0 and v2[1] == 0.0


def test_labels_merge_by_summed_score():
    corpus = kou_corpus(extra_langs=True)
    zh = dict(align(corpus, _query(), "zh").backward_concepts)
    ko = dict(align(corpus, _query(), "ko").backward_concepts)
    assert "door" in ko and "door" not in zh
    labels = fix_dimension_labels(corpus, _query(), ["zh", "ko"])
    totals = {}
    for d in (zh, ko):
        for g, s in d.items():
            if g != "mouth":
                totals[g] = totals.get(g, 0.0) + s
    manual = [g for g, _ in sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))]
    assert list(labels[1:1 + len(manual)]) == manual
    assert labels[:3] == ("mouth", "door", "entrance")
    assert set(labels[1 + len(manual):]) == {PAD_LABEL}


def test_single_reference_labels_follow_its_ranking():
    corpus = kou_corpus()
    back = align(corpus, _query(), "zh").backward_concepts
    labels = fix_dimension_labels(corpus, _query(), ["zh"])
    assert [g for g, _ in back if g != "mouth"] == [l for l in labels[1:] if l]


def test_concept_not_in_source():
    with pytest.raises(ConceptNotInSource):
        forward_pass(perfect_corpus(), _query("giraffe"), "tgt")


def test_backward_with_nothing_to_seed():
    assert backward_pass(perfect_corpus(), [], "tgt", "eng") == ()
    assert backward_pass(perfect_corpus(), ["nowhere"], "tgt", "eng") == ()


def test_query_validation():
    with pytest.raises(InvalidValue):
        ConceptQuery("mouth", ("  ",), "eng")
    with pytest.raises(InvalidValue):
        ConceptualizerConfig(min_n=3, max_n=2)


def test_forward_loop_bounded_by_max_targets():
    # six target words each covering a sixth of the concept's verses
    rows = []
    for i in range(60):
        word = ["ka", "lo", "mi", "nu", "pe", "ro"][i // 5] if i < 30 else "zz"
        rows.append({"eng": ("mouth " if i < 30 else "") + "the", "tgt": word})
    corpus = corpus_from(rows)
    assert len(forward_pass(corpus, _query(), "tgt", ConceptualizerConfig(min_score=0.0))) == 5
    cfg = ConceptualizerConfig(max_targets=2, min_score=0.0)
    assert len(forward_pass(corpus, _query(), "tgt", cfg)) == 2


# -- oracle equivalence on random corpora ---------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.5, 3.84]))
def test_greedy_matches_brute_force(seed, min_score):
    corpus, vocab = random_corpus(seed, n_verses=40)
    cfg = ConceptualizerConfig(max_n=3, min_score=min_score, dims_per_concept=8)
    query = vocab["src"][seed % len(vocab["src"])]
    want, n_cands = brute_greedy(corpus, "src", [query], "tgt", cfg, cfg.max_targets)
    assert n_cands <= 200
    if not want and not any(query in " ".join(corpus.verses[v].values()) for v in corpus.verses):
        return
    got = index_picks(corpus, "src", [query], "tgt", cfg, cfg.max_targets)
    _same_picks(got, want)
    # backward direction from whatever the forward pass accepted
    if want:
        strings = [g for g, _ in want]
        back_want, _ = brute_greedy(corpus, "tgt", strings, "src", cfg, cfg.dims_per_concept - 1)
        _same_picks(index_picks(corpus, "tgt", strings, "src", cfg, cfg.dims_per_concept - 1), back_want)
        result = backward_pass(corpus, strings, "tgt", "src", cfg)
        assert list(result) == sorted(back_want, key=lambda p: (-p[1], p[0]))


# -- whole runs ----------------------------------------------------------------

def test_conceptualize_is_deterministic_and_parallel_safe():
    corpus = kou_corpus(extra_langs=True)
    queries = [_query(), ConceptQuery("door", ("door",), "eng")]
    cfg = ConceptualizerConfig(dims_per_concept=6)
    a = conceptualize(corpus, queries, ["zh", "ko", "en2"], config=cfg)
    b = conceptualize(corpus, queries, ["en2", "ko", "zh"], config=cfg, jobs=2)
    assert to_text(write_concept_vectors, a.vectors) == to_text(write_concept_vectors, b.vectors)
    assert a.vectors.dims_per_concept == 6
    text = to_text(write_concept_vectors, a.vectors)
    again = parse_concept_vectors(text)
    assert to_text(write_concept_vectors, again) == text


def test_conceptualize_records_failures():
    corpus = perfect_corpus()
    queries = [_query(), ConceptQuery("giraffe", ("giraffe",), "eng")]
    run = conceptualize(corpus, queries, ["tgt"], config=ConceptualizerConfig(dims_per_concept=4))
    assert ("mouth", "tgt") not in [(c, t) for c, t, _ in run.failures]
    assert [(c, t) for c, t, _ in run.failures] == [("giraffe", "tgt")]
    assert ("tgt", "mouth") in run.vectors.vectors
