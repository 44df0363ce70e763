import pytest

from poegen.text import (
    MASK_ID,
    MASK_TOKEN,
    UNK_ID,
    UNK_TOKEN,
    Corpus,
    Sequence,
    Vocabulary,
    build_vocab,
    detokenize,
    load_corpus,
    tokenize,
)


def test_build_vocab_keeps_tokens_above_min_count():
    vocab = build_vocab(["a b", "a c"], min_count=1)
    assert len(vocab) == 5
    assert set(vocab.tokens) == {MASK_TOKEN, UNK_TOKEN, "a", "b", "c"}


def test_build_vocab_threshold():
    vocab = build_vocab(["a b", "a c"], min_count=2)
    assert len(vocab) == 3
    assert vocab.tokens == (MASK_TOKEN, UNK_TOKEN, "a")


def test_build_vocab_empty_corpus():
    with pytest.raises(ValueError, match="empty corpus"):
        build_vocab([], min_count=1)


def test_build_vocab_ordering_by_frequency_then_lexicographic():
    vocab = build_vocab(["b a", "b c a"], min_count=1)
    # b:2, a:2, c:1 -> ties break lexicographically
    assert vocab.tokens == (MASK_TOKEN, UNK_TOKEN, "a", "b", "c")


def test_build_vocab_deterministic():
    lines = ["the food was great", "the food was bad", "service was slow"]
    assert build_vocab(lines, 1).tokens == build_vocab(lines, 1).tokens


def test_reserved_ids_are_stable():
    vocab = build_vocab(["x"], 1)
    assert vocab.id_of(MASK_TOKEN) == MASK_ID == 0
    assert vocab.id_of(UNK_TOKEN) == UNK_ID == 1


def test_tokenize_maps_known_tokens():
    vocab = build_vocab(["a b"], 1)
    seq = tokenize("a b", vocab)
    assert seq.ids == (vocab.id_of("a"), vocab.id_of("b"))
    assert seq.frozen == (False, False)


def test_tokenize_unknown_becomes_unk():
    vocab = build_vocab(["a b"], 1)
    assert tokenize("a zzz", vocab).ids == (vocab.id_of("a"), UNK_ID)


def test_tokenize_empty_string_gives_empty_sequence():
    vocab = build_vocab(["a"], 1)
    seq = tokenize("", vocab)
    assert len(seq) == 0


def test_detokenize_round_trip():
    vocab = build_vocab(["a b c"], 1)
    for text in ("a b", "c c a", "a", "[MASK]"):
        assert detokenize(tokenize(text, vocab), vocab) == text


def test_round_trip_on_random_in_vocab_strings():
    import random

    vocab = build_vocab(["red green blue fish cat dog ran sat"], 1)
    words = [t for t in vocab.tokens]
    rng = random.Random(7)
    for _ in range(200):
        text = " ".join(rng.choice(words) for _ in range(rng.randint(1, 12)))
        assert detokenize(tokenize(text, vocab), vocab) == text


def test_detokenize_mask_token():
    vocab = build_vocab(["a"], 1)
    assert detokenize(Sequence((MASK_ID,)), vocab) == MASK_TOKEN


def test_detokenize_rejects_out_of_range_id():
    vocab = build_vocab(["a"], 1)
    with pytest.raises(ValueError, match="out of range"):
        detokenize(Sequence((len(vocab),)), vocab)


def test_vocabulary_rejects_duplicates_and_bad_reserved():
    with pytest.raises(ValueError, match="duplicate"):
        Vocabulary([MASK_TOKEN, UNK_TOKEN, "a", "a"])
    with pytest.raises(ValueError, match="must start with"):
        Vocabulary(["a", "b"])


def test_vocabulary_save_load_round_trip(tmp_path):
    vocab = build_vocab(["b a", "c a"], 1)
    vocab.save(tmp_path / "vocab.txt")
    loaded = Vocabulary.load(tmp_path / "vocab.txt")
    assert loaded == vocab
    assert loaded.id_of(MASK_TOKEN) == MASK_ID
    assert loaded.id_of(UNK_TOKEN) == UNK_ID


def test_sequence_frozen_mask_must_match_length():
    with pytest.raises(ValueError, match="length"):
        Sequence((1, 2), (True,))


def test_sequence_with_id_copies():
    seq = Sequence((1, 2, 3))
    new = seq.with_id(1, 9)
    assert new.ids == (1, 9, 3)
    assert seq.ids == (1, 2, 3)
    assert new.frozen == seq.frozen


def test_corpus_label_length_mismatch():
    with pytest.raises(ValueError, match="labels"):
        Corpus((Sequence((1,)),), labels=(0, 1))


def test_load_corpus_plain_and_labeled(tmp_path):
    vocab = build_vocab(["a b", "c"], 1)
    plain = tmp_path / "plain.txt"
    plain.write_text("a b\nc\n")
    corpus = load_corpus(plain, vocab)
    assert len(corpus) == 2 and corpus.labels is None

    labeled = tmp_path / "labeled.tsv"
    labeled.write_text("1\ta b\n0\tc\n")
    corpus = load_corpus(labeled, vocab, labeled=True)
    assert corpus.labels == (1, 0)


def test_load_corpus_reports_bad_label_line(tmp_path):
    vocab = build_vocab(["a"], 1)
    bad = tmp_path / "bad.tsv"
    bad.write_text("1\ta\nnope\ta\n")
    with pytest.raises(ValueError, match="bad.tsv:2"):
        load_corpus(bad, vocab, labeled=True)
