"""Command-line surface: train toy models, generate or revise text under a
configured expert stack, and run the verification suite.

Exit codes: 0 success, 1 runtime failure, 2 config error, 3 verification
failure. Every command is deterministic given its config and seed.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .config import PRESETS, ConfigError, RunConfig, load_run_config
from .experts import (
    DiscriminatorExpert,
    EmbeddingTable,
    EnergyModel,
    FuzzyExpert,
    HammingExpert,
    LexiconExpert,
    MlmExpert,
)
from .metrics import EvalReport, corpus_bleu, distinct_n, internal_accuracy, mean_hamming
from .models import NaiveBayesClassifier, NeighborMLM, fit_nb_classifier, fit_neighbor_mlm
from .remote import RemoteEnergyExpert, RemoteExpertEndpoint, RemoteProposal
from .sampler import ChainResult, SamplerConfig, init_prompted, init_revision, run_chain
from .text import Sequence, Vocabulary, build_vocab, detokenize, load_corpus, tokenize
from .verify import run_checks

EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_VERIFY = 3


@click.group()
def main():
    """Sample token sequences from a weighted stack of energy experts."""


def _fail(code: int, message: str):
    click.echo(message, err=True)
    sys.exit(code)


# ---------------------------------------------------------------------------
# train


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(), help="plain text, one example per line")
@click.option("--labeled", "labeled_path", required=True, type=click.Path(), help="label<TAB>text lines")
@click.option("--k", default=0.1, show_default=True, help="add-k smoothing for both models")
@click.option("--min-count", default=1, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def train(corpus_path, labeled_path, k, min_count, out_dir):
    """Fit the vocabulary, the neighbor proposal model, and the classifier."""
    problems = [f"missing file: {p}" for p in (corpus_path, labeled_path) if not Path(p).is_file()]
    if k <= 0:
        problems.append(f"k must be > 0, got {k}")
    if min_count < 1:
        problems.append(f"min-count must be >= 1, got {min_count}")
    if problems:
        _fail(EXIT_CONFIG, "\n".join(problems))

    try:
        plain_lines = Path(corpus_path).read_text(encoding="utf-8").splitlines()
        vocab = build_vocab([ln for ln in plain_lines if ln.strip()], min_count)
        plain = load_corpus(corpus_path, vocab)
        labeled = load_corpus(labeled_path, vocab, labeled=True)
        mlm = fit_neighbor_mlm(plain, vocab, k)
        clf = fit_nb_classifier(labeled, vocab, k)
    except ValueError as exc:
        _fail(EXIT_RUNTIME, str(exc))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab.save(out / "vocab.txt")
    mlm.save(out / "neighbor_mlm.json", vocab)
    clf.save(out / "classifier.json", vocab)

    train_acc = sum(
        clf.predict(s) == lab for s, lab in zip(labeled.lines, labeled.labels)
    ) / len(labeled)
    click.echo(f"vocabulary: {len(vocab)} tokens")
    click.echo(f"proposal model: {len(plain)} lines, k={k}")
    click.echo(
        f"classifier: {len(labeled)} lines, {clf.num_classes} classes, "
        f"train accuracy {train_acc:.3f}"
    )
    click.echo(f"wrote vocab.txt, neighbor_mlm.json, classifier.json under {out}")


# ---------------------------------------------------------------------------
# generate / revise


def _load_models(config: RunConfig):
    models = config.resolve(config.models_dir)
    vocab = Vocabulary.load(models / "vocab.txt")
    mlm = NeighborMLM.load(models / "neighbor_mlm.json", vocab)
    clf = None
    if (models / "classifier.json").is_file():
        clf = NaiveBayesClassifier.load(models / "classifier.json", vocab)
    return vocab, mlm, clf


def _build_energy(config: RunConfig, vocab, mlm, clf, source: Sequence | None) -> EnergyModel:
    pairs = []
    for e in config.experts:
        if e.kind == "mlm":
            pairs.append((MlmExpert(mlm), e.weight))
        elif e.kind == "discriminator":
            target = e.target if e.target is not None else config.target_class
            pairs.append((DiscriminatorExpert(clf, target), e.weight))
        elif e.kind == "hamming":
            pairs.append((HammingExpert(source), e.weight))
        elif e.kind == "fuzzy":
            table = EmbeddingTable.load(config.resolve(e.embeddings))
            pairs.append((FuzzyExpert(source, table, vocab), e.weight))
        elif e.kind == "lexicon":
            pairs.append((LexiconExpert.from_file(config.resolve(e.lexicon), vocab), e.weight))
        elif e.kind == "remote":
            endpoint = RemoteExpertEndpoint(base_url=e.url, name=e.name)
            pairs.append((RemoteEnergyExpert(endpoint, vocab), e.weight))
    return EnergyModel(pairs)


def _proposal(config: RunConfig, vocab, mlm):
    if config.remote_proposal:
        endpoint = RemoteExpertEndpoint(
            base_url=config.remote_proposal["url"], name=config.remote_proposal["name"]
        )
        return RemoteProposal(endpoint, vocab)
    return mlm


def _target_class(config: RunConfig) -> int | None:
    if config.target_class is not None:
        return config.target_class
    for e in config.experts:
        if e.kind == "discriminator" and e.target is not None:
            return e.target
    return None


def _write_outputs(
    config: RunConfig,
    vocab,
    clf,
    results: list[ChainResult],
    sources: list[Sequence] | None,
) -> Path:
    out = config.resolve(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    finals = [r.final for r in results]

    (out / "samples.txt").write_text(
        "\n".join(detokenize(s, vocab) for s in finals) + "\n", encoding="utf-8"
    )

    def maybe_distinct(n):
        try:
            return distinct_n(finals, n)
        except ValueError:
            return None

    target = _target_class(config)
    report = EvalReport(
        mean_hamming_to_source=mean_hamming(finals, sources) if sources else None,
        internal_classifier_rate=(
            internal_accuracy(finals, clf, target) if clf is not None and target is not None else None
        ),
        distinct_1=maybe_distinct(1),
        distinct_2=maybe_distinct(2),
        distinct_3=maybe_distinct(3),
        corpus_bleu=corpus_bleu(finals, sources) if sources else None,
        mean_total_energy=sum(r.trace[-1].total_e for r in results) / len(results),
        acceptance_rate=sum(r.acceptance_rate for r in results) / len(results),
    )
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")

    if config.trace:
        tdir = out / "traces"
        tdir.mkdir(exist_ok=True)
        for idx, r in enumerate(results):
            (tdir / f"chain_{idx:05d}.csv").write_text(r.trace_csv(), encoding="utf-8")
    return out


def _run_generate(config: RunConfig) -> Path:
    vocab, mlm, clf = _load_models(config)
    energy = _build_energy(config, vocab, mlm, clf, source=None)
    proposal = _proposal(config, vocab, mlm)
    results = []
    chain_index = 0
    for prompt_text in config.prompts:
        prompt = tokenize(prompt_text, vocab)
        init = init_prompted(prompt, config.length)
        for _ in range(config.samples_per_prompt):
            sampler = SamplerConfig(
                energy=energy,
                proposal=proposal,
                epochs=config.epochs,
                seed=config.seed + chain_index,
                position_order=config.position_order,
            )
            results.append(run_chain(init, sampler))
            chain_index += 1
    return _write_outputs(config, vocab, clf, results, sources=None)


def _run_revise(config: RunConfig) -> Path:
    vocab, mlm, clf = _load_models(config)
    proposal = _proposal(config, vocab, mlm)
    sources = [
        s for s in load_corpus(config.resolve(config.source_file), vocab).lines
    ]
    frozen: set[int] | None = None
    results = []
    for idx, source in enumerate(sources):
        if config.frozen_positions is not None:
            frozen = set(config.frozen_positions)
        elif config.revisable_positions is not None:
            frozen = set(range(len(source))) - set(config.revisable_positions)
        init = init_revision(source, frozen)
        energy = _build_energy(config, vocab, mlm, clf, source=source)
        sampler = SamplerConfig(
            energy=energy,
            proposal=proposal,
            epochs=config.epochs,
            seed=config.seed + idx,
            position_order=config.position_order,
        )
        results.append(run_chain(init, sampler))
    return _write_outputs(config, vocab, clf, results, sources=sources)


def _config_options(fn):
    fn = click.option("--config", "config_path", required=True, type=click.Path())(fn)
    fn = click.option("--seed", type=int, default=None, help="override the config seed")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(), default=None, help="override out_dir")(fn)
    fn = click.option("--trace", is_flag=True, help="write per-chain trace CSVs")(fn)
    fn = click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None)(fn)
    fn = click.option(
        "--remote-expert",
        "remote_experts",
        multiple=True,
        help="url:name:weight, may repeat",
    )(fn)
    return fn


def _run_task(task, config_path, seed, out_dir, trace, preset, remote_experts):
    try:
        config = load_run_config(
            config_path,
            preset=preset,
            seed=seed,
            out_dir=out_dir,
            trace=trace,
            remote_experts=list(remote_experts),
            task_override=task,
        )
        if config.task != task:
            raise ConfigError([f"config task is {config.task!r}; this command runs {task!r}"])
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    try:
        out = _run_generate(config) if task == "generate" else _run_revise(config)
    except Exception as exc:
        _fail(EXIT_RUNTIME, f"{type(exc).__name__}: {exc}")
    click.echo(f"wrote samples.txt and report.json under {out}")


@main.command()
@_config_options
def generate(config_path, seed, out_dir, trace, preset, remote_experts):
    """Prompted generation: fill masked positions after each frozen prompt."""
    _run_task("generate", config_path, seed, out_dir, trace, preset, remote_experts)


@main.command()
@_config_options
def revise(config_path, seed, out_dir, trace, preset, remote_experts):
    """Rewrite source lines toward the configured experts."""
    _run_task("revise", config_path, seed, out_dir, trace, preset, remote_experts)


# ---------------------------------------------------------------------------
# verify


@main.command()
@click.option("--scale", type=click.Choice(["tiny", "small"]), default="tiny", show_default=True)
def verify(scale):
    """Run the correctness suite against exact enumeration."""
    try:
        results = run_checks(scale)
    except Exception as exc:
        _fail(EXIT_RUNTIME, f"{type(exc).__name__}: {exc}")
    failed = False
    for r in results:
        click.echo(r.line())
        failed = failed or not r.passed
    if failed:
        _fail(EXIT_VERIFY, "verification failed")


if __name__ == "__main__":
    main()
