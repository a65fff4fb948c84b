"""Command-line interface: parse raw text, evaluate files, benchmark.

Exit codes: 0 success, 1 usage error, 2 data error (including any sentence
that failed to parse).
"""

from __future__ import annotations

import json
import os
import statistics
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .bundle import (ModelBundle, embed, load_bundle,
                     load_embedding_dump, synthetic_bundle)
from .conllu import make_tokens, parse_conllu, serialize_conllu
from .errors import EngineError
from .pipeline import parse_lines, run_heads
from .profile import LanguageProfile, builtin_profile_path, load_profile
from .scoring import format_report, score_corpus
from .synthesis import convert_to_ud

PROFILE_DIR_ENV = "WTPARSE_PROFILE_DIR"


def _resolve_profile(name_or_path: str) -> LanguageProfile:
    path = Path(name_or_path)
    if path.suffix in (".yaml", ".yml") or path.exists():
        return load_profile(path)
    env_dir = os.environ.get(PROFILE_DIR_ENV)
    if env_dir:
        candidate = Path(env_dir) / f"{name_or_path}.yaml"
        if candidate.exists():
            return load_profile(candidate)
    return load_profile(builtin_profile_path(name_or_path))


def _load_engine(bundle_path: str | None, seed: int | None, dim: int,
                 profile: LanguageProfile) -> ModelBundle:
    if bundle_path:
        return load_bundle(bundle_path)
    if seed is None:
        raise click.UsageError("either --bundle or --seed is required")
    return synthetic_bundle(seed, dim, profile)


@click.group()
@click.version_option(version=__version__, prog_name="wtparse")
def cli() -> None:
    """Whole-token parsing engine for morphologically rich languages."""


@cli.command("parse")
@click.option("--bundle", "bundle_path", type=click.Path(exists=True),
              help="Model bundle file.")
@click.option("--seed", type=int, default=None,
              help="Use a synthetic bundle with this seed instead of --bundle.")
@click.option("--dim", type=int, default=64, show_default=True,
              help="Embedding dimension for synthetic bundles.")
@click.option("--profile", "profile_name", default="hebrew", show_default=True,
              help="Profile name (builtin or $WTPARSE_PROFILE_DIR) or file path.")
@click.option("--input", "input_path", type=click.Path(exists=True),
              help="Input file, one whitespace-tokenized sentence per line "
                   "(default: stdin).")
@click.option("--output", "output_path", type=click.Path(),
              help="Output file (default: stdout).")
@click.option("--batch", type=int, default=32, show_default=True,
              help="Sentences per worker batch.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--ner", "with_ner", is_flag=True,
              help="Emit predicted entity tags as '# ner = ...' comments.")
@click.option("--embeddings", "embeddings_path", type=click.Path(exists=True),
              help="Embedding dump for bundles without a synthetic embedder.")
@click.option("--format", "output_format", default="conllu", show_default=True,
              type=click.Choice(["conllu"]))
def cmd_parse(bundle_path, seed, dim, profile_name, input_path, output_path,
              batch, threads, with_ner, embeddings_path, output_format) -> None:
    """Parse raw sentences to CoNLL-U."""
    profile = _resolve_profile(profile_name)
    bundle = _load_engine(bundle_path, seed, dim, profile)
    if batch < 1:
        raise click.UsageError("--batch must be >= 1")
    dump = load_embedding_dump(embeddings_path) if embeddings_path else None

    if input_path:
        text = Path(input_path).read_text(encoding="utf-8")
    else:
        text = sys.stdin.read()
    lines = [line for line in text.splitlines() if line.strip()]

    results = parse_lines(lines, bundle, profile, dump,
                          threads=threads, batch=batch)
    failures = 0
    blocks: list[str] = []
    for number, (line, result) in enumerate(zip(lines, results), start=1):
        if isinstance(result, Exception):
            failures += 1
            click.echo(f"sentence {number}: {result}", err=True)
            continue
        sentence = result.sentence
        sentence.comments.insert(0, f"# sent_id = {number}")
        if with_ner:
            sentence.comments.append("# ner = " + " ".join(result.ner.tags))
            if result.ner.spans:
                rendered_spans = " ".join(
                    f"{start}-{end}:{cls}"
                    for start, end, cls in result.ner.spans)
                sentence.comments.append(f"# ner_spans = {rendered_spans}")
        blocks.append(serialize_conllu([sentence]))
    rendered = "".join(blocks)
    if output_path:
        Path(output_path).write_text(rendered, encoding="utf-8")
    else:
        click.echo(rendered, nl=False)
    if failures:
        raise EngineError(f"{failures} sentence(s) failed to parse")


def _read_ner_comment(sentence) -> list[str] | None:
    for line in sentence.comments:
        if line.startswith("# ner ="):
            return line.split("=", 1)[1].split()
    return None


@cli.command("eval")
@click.argument("pred_path", type=click.Path(exists=True))
@click.argument("gold_path", type=click.Path(exists=True))
@click.option("--format", "output_format", default="report", show_default=True,
              type=click.Choice(["report", "json"]))
@click.option("--output", "output_path", type=click.Path(),
              help="Write the report here instead of stdout.")
def cmd_eval(pred_path, gold_path, output_format, output_path) -> None:
    """Score a prediction file against a gold file (both CoNLL-U)."""
    pred = parse_conllu(Path(pred_path).read_text(encoding="utf-8"))
    gold = parse_conllu(Path(gold_path).read_text(encoding="utf-8"))
    if len(pred) != len(gold):
        raise EngineError(
            f"files have {len(pred)} vs {len(gold)} sentences")
    for number, (p, g) in enumerate(zip(pred, gold), start=1):
        p_toks = [t.surface for t in p.whole_tokens()]
        g_toks = [t.surface for t in g.whole_tokens()]
        if p_toks != g_toks:
            raise EngineError(
                f"sentence {number} diverges: {' '.join(p_toks)!r} vs "
                f"{' '.join(g_toks)!r}")
    ner_pairs = []
    for p, g in zip(pred, gold):
        p_tags, g_tags = _read_ner_comment(p), _read_ner_comment(g)
        if p_tags is not None and g_tags is not None:
            ner_pairs.append((p_tags, g_tags))
    report = score_corpus(list(zip(pred, gold)),
                          ner_pairs if ner_pairs else None)
    if output_format == "json":
        rendered = json.dumps(report.as_dict(), indent=2) + "\n"
    else:
        rendered = format_report(report) + "\n"
    if output_path:
        Path(output_path).write_text(rendered, encoding="utf-8")
    else:
        click.echo(rendered, nl=False)


def _bench_corpus(seed: int, lengths: list[int], per_length: int) -> list[list[str]]:
    rng = np.random.default_rng(seed)
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    sentences = []
    for length in lengths:
        for _ in range(per_length):
            words = []
            for _ in range(length):
                size = int(rng.integers(2, 9))
                words.append("".join(alphabet[i] for i in
                                     rng.integers(0, len(alphabet), size)))
            sentences.append(words)
    return sentences


@cli.command("bench")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--profile", "profile_name", default="hebrew", show_default=True)
@click.option("--dim", type=int, default=768, show_default=True)
@click.option("--per-length", type=int, default=10, show_default=True,
              help="Sentences generated per length bucket.")
@click.option("--gate-ms", type=float, default=1.0, show_default=True,
              help="Pass/fail threshold for the 32-token post-encoder median.")
def cmd_bench(seed, profile_name, dim, per_length, gate_ms) -> None:
    """Benchmark per-sentence latency on a synthetic corpus (16-256 tokens)."""
    profile = _resolve_profile(profile_name)
    bundle = synthetic_bundle(seed, dim, profile)
    lengths = [16, 32, 64, 128, 256]
    corpus = _bench_corpus(seed, lengths, per_length)

    post_times: dict[int, list[float]] = {length: [] for length in lengths}
    full_times: dict[int, list[float]] = {length: [] for length in lengths}
    for words in corpus:
        tokens = make_tokens(words)
        begin = time.perf_counter()
        rows = embed(tokens, bundle)
        embedded = time.perf_counter()
        synthesis_input, _ = run_heads(rows, tokens, bundle, profile)
        convert_to_ud(synthesis_input, profile)
        done = time.perf_counter()
        post_times[len(words)].append(done - embedded)
        full_times[len(words)].append(done - begin)

    click.echo(f"latency report (seed={seed}, d={dim}, d_head={bundle.d_head})")
    click.echo("tokens  post-encoder median/p95      full median/p95")
    for length in lengths:
        post, full = sorted(post_times[length]), sorted(full_times[length])
        click.echo(
            f"{length:>6}  {statistics.median(post) * 1e3:8.3f} ms /"
            f"{post[int(0.95 * (len(post) - 1))] * 1e3:8.3f} ms"
            f"  {statistics.median(full) * 1e3:8.3f} ms /"
            f"{full[int(0.95 * (len(full) - 1))] * 1e3:8.3f} ms")
    gate_median = statistics.median(post_times[32]) * 1e3
    verdict = "PASS" if gate_median <= gate_ms else "FAIL"
    click.echo(f"gate: 32-token post-encoder median {gate_median:.3f} ms "
               f"<= {gate_ms:.3f} ms ... {verdict}")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as err:
        return int(err.exit_code)
    except click.ClickException as err:
        err.show()
        return 1
    except EngineError as err:
        click.echo(f"error: {err}", err=True)
        return 2
    except (OSError, ValueError) as err:
        click.echo(f"error: {err}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
