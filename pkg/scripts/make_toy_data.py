"""Regenerate the packaged toy sentiment data.

Two line shapes, both exactly 8 tokens:

  the NOUN was ADJ when we visited yesterday      (class-exclusive adjective)
  the NOUN seemed rather MOOD and quite MOOD      (mood words skewed 4:1)

The exclusive adjectives give the classifier a strong per-token signal
(log-likelihood ratio ~4.3 with k=0.1) and the skewed moods a medium one
(~1.4), which is what gives the weight sweeps their graded response.
Deterministic: no RNG in the corpus, a fixed seed for the embeddings.
"""

from pathlib import Path

import numpy as np

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "poegen" / "data"

NOUNS = ["food", "service", "pizza", "coffee", "staff", "place", "room"]
POS_ADJ = ["great", "tasty", "lovely", "wonderful"]
NEG_ADJ = ["awful", "bland", "dreadful", "terrible"]
POS_MOOD = ["pleasant", "charming", "cheerful", "delightful"]
NEG_MOOD = ["gloomy", "shabby", "noisy", "dismal"]

B_LINES_PER_NOUN = 10  # 20 mood slots per noun per class, 16 same-class + 4 crossed


def adjective_lines(label, adjectives):
    for noun in NOUNS:
        for adj in adjectives:
            yield label, f"the {noun} was {adj} when we visited yesterday"


def mood_lines(label, same, other):
    # Deterministic 4:1 skew: slots cycle through the same-class moods and
    # every fifth pick crosses over.
    for n_i, noun in enumerate(NOUNS):
        for line_i in range(B_LINES_PER_NOUN):
            moods = []
            for slot in range(2):
                pick = n_i * B_LINES_PER_NOUN * 2 + line_i * 2 + slot
                pool = other if pick % 5 == 4 else same
                moods.append(pool[pick % len(pool)])
            yield label, f"the {noun} seemed rather {moods[0]} and quite {moods[1]}"


def build_corpus():
    lines = []
    lines.extend(adjective_lines(1, POS_ADJ))
    lines.extend(adjective_lines(0, NEG_ADJ))
    lines.extend(mood_lines(1, POS_MOOD, NEG_MOOD))
    lines.extend(mood_lines(0, NEG_MOOD, POS_MOOD))
    return lines


def write_embeddings(tokens, path, dim=8, seed=20240901):
    """Group-structured unit vectors: same-group tokens stay close."""
    groups = {
        "noun": NOUNS,
        "pos": POS_ADJ + POS_MOOD,
        "neg": NEG_ADJ + NEG_MOOD,
    }
    rng = np.random.default_rng(seed)
    bases = {g: rng.normal(size=dim) for g in groups}
    out = []
    for token in tokens:
        base = None
        for g, members in groups.items():
            if token in members:
                base = bases[g]
                break
        if base is None:
            base = rng.normal(size=dim)  # scaffold tokens: independent
        vec = base + 0.25 * rng.normal(size=dim)
        vec = vec / np.linalg.norm(vec)
        out.append(token + " " + " ".join(f"{v:.6f}" for v in vec))
    path.write_text("\n".join(out) + "\n", encoding="utf-8")


def main():
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    corpus = build_corpus()

    labeled = "\n".join(f"{label}\t{text}" for label, text in corpus) + "\n"
    (DATA_DIR / "toy_sentiment.tsv").write_text(labeled, encoding="utf-8")
    plain = "\n".join(text for _, text in corpus) + "\n"
    (DATA_DIR / "toy_corpus.txt").write_text(plain, encoding="utf-8")

    (DATA_DIR / "positive_words.txt").write_text(
        "\n".join(POS_ADJ + POS_MOOD) + "\n", encoding="utf-8"
    )
    (DATA_DIR / "prompts.txt").write_text(
        "\n".join(f"the {n}" for n in NOUNS) + "\n", encoding="utf-8"
    )

    seen = set()
    tokens = ["[UNK]"]
    for _, text in corpus:
        for t in text.split():
            if t not in seen:
                seen.add(t)
                tokens.append(t)
    write_embeddings(tokens, DATA_DIR / "toy_embeddings.txt")

    counts = {}
    for label, _ in corpus:
        counts[label] = counts.get(label, 0) + 1
    print(f"wrote {len(corpus)} lines {counts}, {len(tokens)} embedding tokens -> {DATA_DIR}")


if __name__ == "__main__":
    main()
