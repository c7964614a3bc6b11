import math

import pytest
from hypothesis import given, settings, strategies as st

from bullyguard.features import (
    FeatureError,
    SparseVector,
    TfidfConfig,
    fit_tfidf,
    transform,
)
from bullyguard.rng import Rng


def dense_tfidf_oracle(docs, query, sublinear=False, l2=False, min_df=1):
    """Naive dense TF-IDF, written independently of the sparse code path.

    Builds the vocabulary by scanning documents in order, computes document
    frequencies by explicit membership tests, and produces the query's dense
    vector straight from the formula idf = ln((1+N)/(1+df)) + 1.
    """
    vocab = []
    for doc in docs:
        for token in doc:
            if token not in vocab:
                vocab.append(token)
    df = {tok: sum(1 for doc in docs if tok in doc) for tok in vocab}
    vocab = [tok for tok in vocab if df[tok] >= min_df]
    n = len(docs)
    idf = {tok: math.log((1 + n) / (1 + df[tok])) + 1.0 for tok in vocab}
    dense = []
    for tok in vocab:
        count = sum(1 for q in query if q == tok)
        if count == 0:
            dense.append(0.0)
            continue
        tf = 1.0 + math.log(count) if sublinear else float(count)
        dense.append(tf * idf[tok])
    if l2:
        norm = math.sqrt(sum(v * v for v in dense))
        if norm > 0:
            dense = [v / norm for v in dense]
    return vocab, dense


def test_fit_hand_case():
    model = fit_tfidf([["a", "b"], ["a"]], TfidfConfig(l2_normalize=False))
    vocab = model.vocabulary
    assert vocab.token_to_id == {"a": 0, "b": 1}
    assert vocab.document_frequency == {0: 2, 1: 1}
    assert model.idf[0] == pytest.approx(1.0)
    assert model.idf[1] == pytest.approx(math.log(3 / 2) + 1.0)


def test_fit_single_doc_uniform_idf():
    model = fit_tfidf([["x", "y", "z"]])
    assert all(v == pytest.approx(1.0) for v in model.idf)


def test_fit_min_df_threshold():
    model = fit_tfidf([["a", "b"], ["a"]], TfidfConfig(min_df=2))
    assert set(model.vocabulary.token_to_id) == {"a"}


def test_fit_rejects_empty():
    with pytest.raises(FeatureError, match="at least one document"):
        fit_tfidf([])
    with pytest.raises(FeatureError, match="empty corpus after preprocessing"):
        fit_tfidf([[], []])


def test_transform_hand_case_unnormalized():
    model = fit_tfidf([["a", "b"], ["a"]], TfidfConfig(l2_normalize=False))
    vec = transform(["a", "a", "b"], model)
    assert vec.indices == (0, 1)
    assert vec.values[0] == pytest.approx(2.0)
    assert vec.values[1] == pytest.approx(math.log(3 / 2) + 1.0)


def test_transform_l2_normalized():
    model = fit_tfidf([["a", "b"], ["a"]], TfidfConfig(l2_normalize=True))
    vec = transform(["a", "a", "b"], model)
    b_idf = math.log(3 / 2) + 1.0
    norm = math.sqrt(2.0 ** 2 + b_idf ** 2)
    assert vec.values[0] == pytest.approx(2.0 / norm)
    assert vec.values[1] == pytest.approx(b_idf / norm)
    assert vec.norm() == pytest.approx(1.0, abs=1e-9)


def test_transform_oov_zero_vector():
    model = fit_tfidf([["a", "b"], ["a"]])
    vec = transform(["zzz"], model)
    assert vec.indices == () and vec.values == ()
    assert transform([], model).nnz == 0


def test_transform_sublinear_tf():
    model = fit_tfidf([["a"]], TfidfConfig(sublinear_tf=True, l2_normalize=False))
    vec = transform(["a", "a", "a"], model)
    assert vec.values[0] == pytest.approx(1.0 + math.log(3.0))


def test_idf_monotone_in_rarity():
    docs = [["a", "b"], ["a", "c"], ["a"], ["b"]]
    model = fit_tfidf(docs)
    df = model.vocabulary.document_frequency
    tid = model.vocabulary.token_to_id
    for t1 in tid:
        for t2 in tid:
            if df[tid[t1]] < df[tid[t2]]:
                assert model.idf[tid[t1]] > model.idf[tid[t2]]


def _random_corpus(rng: Rng, max_docs=10, vocab_size=8):
    alphabet = [f"w{i}" for i in range(1 + rng.randbelow(vocab_size))]
    n_docs = 1 + rng.randbelow(max_docs)
    docs = []
    for _ in range(n_docs):
        docs.append([alphabet[rng.randbelow(len(alphabet))]
                     for _ in range(1 + rng.randbelow(6))])
    return docs


@pytest.mark.parametrize("sublinear,l2", [(False, False), (True, False), (False, True), (True, True)])
def test_oracle_equivalence_modes(sublinear, l2):
    rng = Rng(99)
    for _ in range(25):
        docs = _random_corpus(rng)
        config = TfidfConfig(sublinear_tf=sublinear, l2_normalize=l2)
        model = fit_tfidf(docs, config)
        query = docs[rng.randbelow(len(docs))] + ["w0"]
        vocab, expected = dense_tfidf_oracle(docs, query, sublinear, l2)
        got = transform(query, model).to_dense(model.n_features)
        assert len(vocab) == model.n_features
        for tok, want in zip(vocab, expected):
            has = got[model.vocabulary.token_to_id[tok]]
            assert has == pytest.approx(want, abs=1e-9), tok


def test_transform_independent_of_other_documents_order():
    docs = [["a", "b"], ["b", "c"], ["a"]]
    model = fit_tfidf(docs)
    v1 = transform(["a", "c"], model)
    v2 = transform(["a", "c"], model)
    assert v1 == v2


def test_sparse_vector_invariants():
    with pytest.raises(ValueError):
        SparseVector(indices=(0, 1), values=(1.0,))
    vec = SparseVector(indices=(1, 3), values=(2.0, -1.0))
    assert vec.dot_dense([0.0, 10.0, 0.0, 4.0]) == pytest.approx(16.0)
    assert vec.to_dense(5) == [0.0, 2.0, 0.0, -1.0, 0.0]


@settings(max_examples=50, deadline=None)
@given(st.lists(
    st.lists(st.sampled_from(["a", "b", "c", "d"]), min_size=0, max_size=6),
    min_size=1, max_size=8,
).filter(lambda docs: any(docs)))
def test_transform_indices_sorted_values_nonzero(docs):
    model = fit_tfidf(docs)
    for doc in docs:
        vec = transform(doc, model)
        assert list(vec.indices) == sorted(set(vec.indices))
        assert all(v != 0.0 for v in vec.values)
