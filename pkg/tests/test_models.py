import itertools

import numpy as np
import pytest

from poegen.models import (
    NaiveBayesClassifier,
    NeighborMLM,
    TabularJoint,
    classify,
    conditional,
    fit_nb_classifier,
    fit_neighbor_mlm,
)
from poegen.text import Corpus, Sequence, build_vocab, tokenize


def corpus_from(texts, vocab, labels=None):
    lines = tuple(tokenize(t, vocab) for t in texts)
    return Corpus(lines, tuple(labels) if labels is not None else None)


# --- neighbor model ----------------------------------------------------------


def test_fit_neighbor_tallies_triples():
    vocab = build_vocab(["a b a"], 1)
    model = fit_neighbor_mlm(corpus_from(["a b a"], vocab), vocab, k=0.1)
    a, b = vocab.id_of("a"), vocab.id_of("b")
    # hand tally: triples (BOUND,a,b), (a,b,a), (b,a,BOUND)
    assert model._counts[(a, a)][b] == 1.0
    x = tokenize("a b a", vocab)
    probs = conditional(model, x, 1)
    assert probs[b] == pytest.approx((1 + 0.1) / (1 + 0.1 * len(vocab)))


def test_unseen_context_is_uniform():
    vocab = build_vocab(["a b"], 1)
    model = fit_neighbor_mlm(corpus_from(["a b"], vocab), vocab, k=0.1)
    x = tokenize("b b b", vocab)
    probs = conditional(model, x, 1)  # context (b, b) never observed
    assert np.allclose(probs, 1.0 / len(vocab))


def test_large_k_approaches_uniform():
    vocab = build_vocab(["a b a b"], 1)
    model = fit_neighbor_mlm(corpus_from(["a b a b"], vocab), vocab, k=1e9)
    x = tokenize("a b a", vocab)
    assert np.allclose(conditional(model, x, 1), 1.0 / len(vocab), atol=1e-9)


def test_neighbor_argmax_matches_tally():
    vocab = build_vocab(["a b a b"], 1)
    model = fit_neighbor_mlm(corpus_from(["a b a b"], vocab), vocab, k=0.1)
    x = tokenize("a b a", vocab)  # context (a, ., a)
    assert int(np.argmax(conditional(model, x, 1))) == vocab.id_of("b")


def test_neighbor_conditionals_normalized_and_positive():
    k = 0.1
    vocab = build_vocab(["a b c", "c b a"], 1)
    model = fit_neighbor_mlm(corpus_from(["a b c", "c b a"], vocab), vocab, k=k)
    for text in ("a b c", "c c c", "b a b"):
        x = tokenize(text, vocab)
        for i in range(len(x)):
            probs = conditional(model, x, i)
            assert abs(probs.sum() - 1.0) < 1e-12
            # smoothing floor: k / (context total + k*V)
            ctx_total = model._context_counts(model._context(x, i)).sum()
            assert (probs >= k / (ctx_total + k * len(vocab)) - 1e-15).all()


def test_neighbor_invariant_to_line_order():
    vocab = build_vocab(["a b c", "c b a"], 1)
    m1 = fit_neighbor_mlm(corpus_from(["a b c", "c b a"], vocab), vocab, k=0.1)
    m2 = fit_neighbor_mlm(corpus_from(["c b a", "a b c"], vocab), vocab, k=0.1)
    x = tokenize("a b c", vocab)
    for i in range(3):
        assert np.array_equal(conditional(m1, x, i), conditional(m2, x, i))


def test_fit_neighbor_rejects_empty_and_bad_k():
    vocab = build_vocab(["a"], 1)
    with pytest.raises(ValueError, match="empty"):
        fit_neighbor_mlm(Corpus(()), vocab, k=0.1)
    with pytest.raises(ValueError, match="k must be"):
        fit_neighbor_mlm(corpus_from(["a"], vocab), vocab, k=0.0)


def test_neighbor_position_out_of_range():
    vocab = build_vocab(["a b"], 1)
    model = fit_neighbor_mlm(corpus_from(["a b"], vocab), vocab, k=0.1)
    with pytest.raises(ValueError, match="out of range"):
        conditional(model, tokenize("a b", vocab), 2)


def test_neighbor_save_load_round_trip(tmp_path):
    vocab = build_vocab(["a b c a b"], 1)
    model = fit_neighbor_mlm(corpus_from(["a b c a b"], vocab), vocab, k=0.25)
    model.save(tmp_path / "m.json", vocab)
    loaded = NeighborMLM.load(tmp_path / "m.json", vocab)
    x = tokenize("a b c", vocab)
    for i in range(3):
        assert np.array_equal(conditional(model, x, i), conditional(loaded, x, i))
        assert model.masked_score(x, i) == loaded.masked_score(x, i)


def test_neighbor_load_rejects_wrong_vocab(tmp_path):
    vocab = build_vocab(["a b"], 1)
    model = fit_neighbor_mlm(corpus_from(["a b"], vocab), vocab, k=0.1)
    model.save(tmp_path / "m.json", vocab)
    other = build_vocab(["x y"], 1)
    with pytest.raises(ValueError, match="different vocabulary"):
        NeighborMLM.load(tmp_path / "m.json", other)


# --- tabular joint -----------------------------------------------------------


def test_tabular_uniform_conditionals():
    joint = TabularJoint.uniform(2, 2)
    for ids in itertools.product(range(2), repeat=2):
        x = Sequence(ids)
        for i in range(2):
            assert np.allclose(conditional(joint, x, i), [0.5, 0.5])


def test_tabular_conditional_row_normalization():
    # p(aa)=0.4 p(ab)=0.4 p(ba)=0.1 p(bb)=0.1; x=aa, i=1 -> (0.5, 0.5)
    joint = TabularJoint(np.array([[0.4, 0.4], [0.1, 0.1]]))
    probs = conditional(joint, Sequence((0, 0)), 1)
    assert np.allclose(probs, [0.5, 0.5])
    # and at i=0: p(.|x_1=a) = (0.4, 0.1)/0.5
    probs = conditional(joint, Sequence((0, 0)), 0)
    assert np.allclose(probs, [0.8, 0.2])


def test_tabular_conditional_matches_brute_force_renormalization():
    # independent oracle: renormalize the raw table with explicit loops,
    # exhaustively over every (x, i) for V, L <= 4
    for v, length in itertools.product((2, 3, 4), repeat=2):
        joint = TabularJoint.random(v, length, seed=v * 10 + length)
        for ids in itertools.product(range(v), repeat=length):
            x = Sequence(ids)
            for i in range(length):
                brute = np.array(
                    [joint.table[ids[:i] + (t,) + ids[i + 1 :]] for t in range(v)]
                )
                brute = brute / brute.sum()
                assert np.allclose(conditional(joint, x, i), brute, atol=1e-12)


def test_tabular_table_validation():
    with pytest.raises(ValueError, match="sums to"):
        TabularJoint(np.array([[0.5, 0.5], [0.5, 0.5]]))
    with pytest.raises(ValueError, match="positive"):
        TabularJoint(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_tabular_length_mismatch():
    joint = TabularJoint.uniform(2, 2)
    with pytest.raises(ValueError, match="length"):
        joint.log_prob(Sequence((0, 1, 0)))


# --- classifier ----------------------------------------------------------------


def test_nb_separable_corpus_perfect_train_accuracy():
    vocab = build_vocab(["good stuff here", "bad stuff there"], 1)
    texts = ["good stuff here", "good stuff there", "bad stuff here", "bad stuff there"]
    labels = [1, 1, 0, 0]
    clf = fit_nb_classifier(corpus_from(texts, vocab, labels), vocab, k=0.1)
    assert all(
        clf.predict(tokenize(t, vocab)) == lab for t, lab in zip(texts, labels)
    )


def test_nb_symmetric_counts_give_half_posterior():
    vocab = build_vocab(["a b"], 1)
    texts = ["a b", "a b"]
    clf = fit_nb_classifier(corpus_from(texts, vocab, [0, 1]), vocab, k=0.1)
    post = classify(clf, tokenize("a b", vocab))
    assert np.allclose(post, [0.5, 0.5])


def test_nb_empty_sequence_returns_priors():
    vocab = build_vocab(["a b"], 1)
    clf = fit_nb_classifier(corpus_from(["a", "a", "b"], vocab, [0, 0, 1]), vocab, k=0.1)
    post = classify(clf, Sequence(()))
    assert np.allclose(post, [2 / 3, 1 / 3])


def test_nb_posteriors_normalized():
    vocab = build_vocab(["a b c d"], 1)
    clf = fit_nb_classifier(
        corpus_from(["a b", "c d", "a d"], vocab, [0, 1, 2]), vocab, k=0.5
    )
    for text in ("a", "a b c", "d d d d"):
        assert abs(classify(clf, tokenize(text, vocab)).sum() - 1.0) < 1e-12


def test_nb_argmax_tie_breaks_to_lowest_class_id():
    vocab = build_vocab(["a"], 1)
    clf = fit_nb_classifier(corpus_from(["a", "a"], vocab, [3, 7]), vocab, k=0.1)
    assert clf.predict(tokenize("a", vocab)) == 3


def test_nb_single_class_rejected():
    vocab = build_vocab(["a"], 1)
    with pytest.raises(ValueError, match="2 classes"):
        fit_nb_classifier(corpus_from(["a", "a"], vocab, [1, 1]), vocab, k=0.1)


def test_nb_save_load_round_trip(tmp_path):
    vocab = build_vocab(["a b c"], 1)
    clf = fit_nb_classifier(corpus_from(["a b", "c c"], vocab, [0, 1]), vocab, k=0.1)
    clf.save(tmp_path / "clf.json", vocab)
    loaded = NaiveBayesClassifier.load(tmp_path / "clf.json", vocab)
    x = tokenize("a c", vocab)
    assert np.array_equal(clf.posterior(x), loaded.posterior(x))
    assert loaded.class_ids == clf.class_ids
