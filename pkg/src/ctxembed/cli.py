"""Command-line pipeline: vocab -> pairs -> substitutes -> train -> combine -> eval.

Every command writes its outputs atomically (temp file + rename), drops a
resolved-configuration JSON next to each output for provenance, and prints a
one-line summary with counts and timings. Re-running a command with the same
inputs, seed, and workers=1 produces byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from collections import Counter
from pathlib import Path

import numpy as np

from ctxembed import combine as combine_mod
from ctxembed import contexts, corpus, evaluate, lm, plots, sgns
from ctxembed.embeddings import EmbeddingSet


# ----------------------------------------------------------------- helpers

def _tmp_path(path: Path) -> Path:
    return path.with_name(path.name + ".tmp")


def _finalize(tmp: Path, final: Path) -> None:
    os.replace(tmp, final)


def _jsonable(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, list):
        return [_jsonable(v) for v in value]
    return value


def _dump_config(output: Path, args: argparse.Namespace) -> None:
    """Write the resolved configuration next to an output file."""
    resolved = {
        k: _jsonable(v)
        for k, v in sorted(vars(args).items())
        if k != "func" and not k.startswith("_")
    }
    cfg_path = output.with_name(output.name + ".cfg.json")
    tmp = _tmp_path(cfg_path)
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(resolved, f, indent=2, sort_keys=True)
        f.write("\n")
    _finalize(tmp, cfg_path)


def _summary(command: str, message: str, started: float) -> None:
    print(f"{command}: {message} in {time.perf_counter() - started:.2f}s")


def _strip_dim_suffix(stem: str) -> str:
    base, sep, last = stem.rpartition("-")
    if sep and last.isdigit():
        return base
    return stem


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _load_config_file(path: Path) -> dict[str, str]:
    """Parse a "key = value" configuration file (# starts a comment)."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(sub: argparse.ArgumentParser, config: dict[str, str], path: Path) -> None:
    """Use config values as subcommand defaults; explicit flags still win."""
    types: dict[str, object] = {}
    flags: set[str] = set()
    for action in sub._actions:  # argparse has no public introspection API
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            flags.add(action.dest)
        elif action.type is not None:
            types[action.dest] = action.type
        else:
            types[action.dest] = str
    defaults = {}
    for key, value in config.items():
        if key in flags:
            if value.lower() not in ("true", "false"):
                raise ValueError(f"{path}: flag {key} must be true or false, got {value!r}")
            defaults[key] = value.lower() == "true"
        elif key in types:
            defaults[key] = types[key](value)  # type: ignore[operator]
        else:
            raise ValueError(f"{path}: unknown configuration key {key!r}")
    sub.set_defaults(**defaults)


# ---------------------------------------------------------------- commands

def cmd_vocab(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    stats = corpus.ReadStats()
    vocab = corpus.build_vocab(corpus.load_tokenized(args.input, stats), args.min_count)
    tmp = _tmp_path(args.output)
    vocab.save(tmp)
    _finalize(tmp, args.output)
    _dump_config(args.output, args)
    _summary("vocab", f"{len(vocab)} words from {stats.sentences} sentences "
                      f"({stats.skipped_lines} blank lines skipped) -> {args.output}", started)
    return 0


def _keep_probability(count: int, total: int, threshold: float) -> float:
    f = count / total
    return min(1.0, (np.sqrt(f / threshold) + 1.0) * threshold / f)


def cmd_pairs_window(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    vocab = corpus.Vocabulary.load(args.vocab)
    rng = np.random.default_rng(args.seed)
    words = vocab.words
    keep_p = None
    if args.subsample > 0:
        keep_p = [_keep_probability(c, vocab.total_tokens, args.subsample) for c in vocab.counts]

    def rows():
        for sent in corpus.load_tokenized(args.input):
            ids = vocab.to_ids(sent)
            if keep_p is not None:
                ids = [i for i in ids if rng.random() < keep_p[i]]
            for p in contexts.window_pairs(ids, args.window, dynamic=not args.fixed_window, rng=rng):
                yield words[p.target], words[p.context], p.weight

    tmp = _tmp_path(args.output)
    n = contexts.write_pairs(tmp, rows())
    _finalize(tmp, args.output)
    _dump_config(args.output, args)
    _summary("pairs window", f"{n} pairs (window={args.window}, "
                             f"dynamic={not args.fixed_window}) -> {args.output}", started)
    return 0


def cmd_pairs_dep(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    vocab = corpus.Vocabulary.load(args.vocab)

    def edges():
        stats = corpus.ReadStats()
        for sent in corpus.load_conllu(args.input, stats):
            if not args.no_collapse:
                sent = contexts.collapse_prepositions(sent)
            for target, other, ctx in contexts.dep_context_items(sent):
                if target in vocab and other in vocab:
                    yield target, ctx

    counts: Counter[str] = Counter(ctx for _, ctx in edges())
    allowed = {c for c, n in counts.items() if n >= args.min_context_count}
    tmp = _tmp_path(args.output)
    n = contexts.write_pairs(tmp, ((t, c, 1.0) for t, c in edges() if c in allowed))
    _finalize(tmp, args.output)
    _dump_config(args.output, args)
    _summary("pairs dep", f"{n} pairs over {len(allowed)} contexts -> {args.output}", started)
    return 0


def cmd_pairs_sub(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    vocab = corpus.Vocabulary.load(args.vocab)
    rng = np.random.default_rng(args.seed)
    vectors = lm.attach_targets(
        lm.read_substitutes(args.substitutes, vocab),
        corpus.load_tokenized(args.input),
        vocab,
    )
    stats = contexts.PairStats()
    words = vocab.words

    def rows():
        for p in contexts.sub_pairs(vectors, cap_per_type=args.cap_per_type, rng=rng, stats=stats):
            yield words[p.target], words[p.context], p.weight

    tmp = _tmp_path(args.output)
    n = contexts.write_pairs(tmp, rows())
    _finalize(tmp, args.output)
    _dump_config(args.output, args)
    _summary("pairs sub", f"{n} weighted pairs (cap_per_type={args.cap_per_type}, "
                          f"{stats.oov_skipped} OOV occurrences skipped) -> {args.output}", started)
    return 0


def cmd_substitutes(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    vocab = corpus.Vocabulary.load(args.vocab)
    if args.lm_in:
        model = lm.KneserNeyModel.load(args.lm_in)
    else:
        discount = "estimated" if args.estimate_discount else args.discount
        model = lm.train_kn(corpus.load_tokenized(args.input), vocab,
                            order=args.order, discount=discount)
    if args.lm_out:
        tmp = _tmp_path(args.lm_out)
        model.save(tmp)
        _finalize(tmp, args.lm_out)
        _dump_config(args.lm_out, args)

    def vectors():
        for sent_idx, sent in enumerate(corpus.load_tokenized(args.input)):
            if args.max_sentences and sent_idx >= args.max_sentences:
                break
            for pos in range(len(sent)):
                yield model.substitutes(sent, pos, k=args.top_k, sent_idx=sent_idx)

    tmp = _tmp_path(args.output)
    n = lm.write_substitutes(tmp, vectors(), vocab.words)
    _finalize(tmp, args.output)
    _dump_config(args.output, args)
    _summary("substitutes", f"{n} substitute vectors (order={model.order}, "
                            f"k={args.top_k}) -> {args.output}", started)
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    target_counts: Counter[str] = Counter()
    context_counts: Counter[str] = Counter()
    n_rows = 0
    for t, c, _ in contexts.read_pairs(args.pairs):
        target_counts[t] += 1
        context_counts[c] += 1
        n_rows += 1
    if n_rows == 0:
        raise ValueError(f"{args.pairs}: no pairs")

    def freeze(counter: Counter[str]) -> corpus.Vocabulary:
        items = sorted(((w, n) for w, n in counter.items() if n >= args.min_count),
                       key=lambda wn: (-wn[1], wn[0]))
        return corpus.Vocabulary([w for w, _ in items], [n for _, n in items],
                                 total_tokens=sum(counter.values()), min_count=args.min_count)

    word_vocab = freeze(target_counts)
    ctx_vocab = freeze(context_counts)
    if len(word_vocab) == 0 or len(ctx_vocab) == 0:
        raise ValueError(f"{args.pairs}: min-count {args.min_count} leaves an empty vocabulary")

    config = sgns.TrainConfig(
        dim=args.dim, negatives=args.negatives, epochs=args.epochs,
        initial_lr=args.lr, table_exponent=args.table_exponent,
        seed=args.seed, workers=args.workers, engine=args.engine,
    )

    def id_pairs():
        for t, c, w in contexts.read_pairs(args.pairs):
            ti = word_vocab.id(t)
            ci = ctx_vocab.id(c)
            if ti is not None and ci is not None:
                yield ti, ci, w

    targets, ctxs = sgns.train(id_pairs(), word_vocab, ctx_vocab, config)
    output = args.output or args.pairs.with_name(f"{args.pairs.stem}-{args.dim}.vec")
    tmp = _tmp_path(output)
    targets.save_text(tmp)
    _finalize(tmp, output)
    _dump_config(output, args)
    if args.save_contexts:
        tmp = _tmp_path(args.save_contexts)
        ctxs.save_text(tmp)
        _finalize(tmp, args.save_contexts)
    _summary("train", f"{len(targets)} x {args.dim} embeddings from {n_rows} pairs "
                      f"({config.epochs} epochs, workers={config.workers}) -> {output}", started)
    return 0


def _load_view(path: Path, normalize: bool) -> EmbeddingSet:
    e = EmbeddingSet.load_text(path)
    return combine_mod.length_normalize(e) if normalize else e


def cmd_combine_concat(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    a = _load_view(args.a, args.normalize)
    b = _load_view(args.b, args.normalize)
    merged = combine_mod.concat(a, b)
    output = args.output or args.a.with_name(
        f"{_strip_dim_suffix(args.a.stem)}+{_strip_dim_suffix(args.b.stem)}-{merged.dim}.vec"
    )
    tmp = _tmp_path(output)
    merged.save_text(tmp)
    _finalize(tmp, output)
    _dump_config(output, args)
    _summary("combine concat", f"{len(merged)} words x {merged.dim} -> {output}", started)
    return 0


def cmd_combine_svd(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    e = _load_view(args.input, args.normalize)
    reduced = combine_mod.svd_reduce(e, args.k, power=args.power, center=not args.no_center)
    output = args.output or args.input.with_name(
        f"{_strip_dim_suffix(args.input.stem)}-svd{args.k}.vec")
    tmp = _tmp_path(output)
    reduced.save_text(tmp)
    _finalize(tmp, output)
    _dump_config(output, args)
    _summary("combine svd", f"{len(reduced)} words x {args.k} (power={args.power}) -> {output}",
             started)
    return 0


def cmd_combine_cca(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    a = _load_view(args.a, args.normalize)
    b = _load_view(args.b, args.normalize)
    if args.tune:
        benchmark = evaluate.load_word_pairs(args.tune)
        k_grid = _parse_int_list(args.k_grid)
        r_grid = _parse_float_list(args.r_grid)
        model, report = combine_mod.tune_cca(a, b, benchmark, k_grid, r_grid)
        if args.report:
            tmp = _tmp_path(args.report)
            combine_mod.write_tuning_report(tmp, report)
            _finalize(tmp, args.report)
            _dump_config(args.report, args)
            if args.figures:
                scores = [[dict(((kk, rr), s) for kk, rr, s in report)[(k, r)] for r in r_grid]
                          for k in k_grid]
                plots.grid_heatmap(args.report.with_suffix(".png"), k_grid, r_grid, scores,
                                   "CCA tuning")
        detail = f"tuned over {len(report)} cells, best k={model.k} r={model.rx:g}"
    else:
        model = combine_mod.cca_fit(a, b, args.k, rx=args.r, ry=args.ry if args.ry is not None else args.r)
        detail = f"k={model.k} r={model.rx:g}"
    if args.model_out:
        tmp = _tmp_path(args.model_out)
        model.save(tmp)
        _finalize(tmp, args.model_out)
    source = a if args.view == "x" else b
    projected = combine_mod.cca_apply(model, source, view=args.view)
    output = args.output or args.a.with_name(
        f"{_strip_dim_suffix(args.a.stem)}+{_strip_dim_suffix(args.b.stem)}-cca{model.k}.vec")
    tmp = _tmp_path(output)
    projected.save_text(tmp)
    _finalize(tmp, output)
    _dump_config(output, args)
    _summary("combine cca", f"{detail}, projected view {args.view} -> {output}", started)
    return 0


def cmd_eval_wordsim(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    e = EmbeddingSet.load_text(args.embeddings)
    rows = []
    for ds_path in args.dataset:
        ds = evaluate.load_word_pairs(ds_path)
        res = evaluate.eval_wordpairs(e, ds)
        rows.append((ds_path.stem, res))
        print(f"  {ds_path.stem}: spearman={res.spearman:.4f} "
              f"coverage={res.coverage:.3f} n={res.n_used}")
    if args.output:
        tmp = _tmp_path(args.output)
        with open(tmp, "w", encoding="utf-8") as f:
            f.write("dataset\tspearman\tcoverage\tn_used\n")
            for name, res in rows:
                f.write(f"{name}\t{res.spearman!r}\t{res.coverage!r}\t{res.n_used}\n")
        _finalize(tmp, args.output)
        _dump_config(args.output, args)
        if args.figures:
            plots.score_bars(args.output.with_suffix(".png"),
                             [name for name, _ in rows],
                             [res.spearman for _, res in rows],
                             "word-pair benchmarks", "spearman")
    _summary("eval wordsim", f"{len(rows)} dataset(s)", started)
    return 0


def cmd_eval_toefl(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    e = EmbeddingSet.load_text(args.embeddings)
    items = evaluate.load_toefl(args.dataset)
    res = evaluate.eval_toefl(e, items)
    print(f"  accuracy={res.accuracy:.4f} over {res.n_used} covered items "
          f"(coverage={res.coverage:.3f}, accuracy over all={res.accuracy_over_all:.4f})")
    if args.output:
        tmp = _tmp_path(args.output)
        with open(tmp, "w", encoding="utf-8") as f:
            f.write("accuracy\tcoverage\taccuracy_over_all\tn_used\n")
            f.write(f"{res.accuracy!r}\t{res.coverage!r}\t{res.accuracy_over_all!r}\t{res.n_used}\n")
        _finalize(tmp, args.output)
        _dump_config(args.output, args)
        if args.figures:
            plots.score_bars(args.output.with_suffix(".png"),
                             ["covered", "all"], [res.accuracy, res.accuracy_over_all],
                             "synonym selection", "accuracy")
    _summary("eval toefl", f"{len(items)} items", started)
    return 0


def cmd_eval_senti(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    e = EmbeddingSet.load_text(args.embeddings)
    train_ds = evaluate.load_sentiment(args.train)
    test_ds = evaluate.load_sentiment(args.test)
    stats = evaluate.FeaturizeStats()
    X_train = np.array([evaluate.senti_featurize(e, toks, stats) for toks, _ in train_ds.entries])
    y_train = [label for _, label in train_ds.entries]
    X_test = np.array([evaluate.senti_featurize(e, toks, stats) for toks, _ in test_ds.entries])
    y_test = [label for _, label in test_ds.entries]
    w, b = evaluate.senti_train(X_train, y_train, l2=args.l2,
                                max_iter=args.max_iter, tol=args.tol)
    acc_train = evaluate.senti_eval((w, b), X_train, y_train)
    acc_test = evaluate.senti_eval((w, b), X_test, y_test)
    print(f"  train accuracy={acc_train:.4f} test accuracy={acc_test:.4f} "
          f"({stats.all_oov} all-OOV sentences)")
    if args.output:
        tmp = _tmp_path(args.output)
        with open(tmp, "w", encoding="utf-8") as f:
            f.write("split\taccuracy\tn_sentences\n")
            f.write(f"train\t{acc_train!r}\t{len(y_train)}\n")
            f.write(f"test\t{acc_test!r}\t{len(y_test)}\n")
        _finalize(tmp, args.output)
        _dump_config(args.output, args)
        if args.figures:
            plots.score_bars(args.output.with_suffix(".png"), ["train", "test"],
                             [acc_train, acc_test], "sentiment classification", "accuracy")
    _summary("eval senti", f"{len(y_train)}/{len(y_test)} train/test sentences", started)
    return 0


def cmd_eval_neighbors(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    e = EmbeddingSet.load_text(args.embeddings)
    groups = []
    for word in args.word:
        neighbors = evaluate.nearest_neighbors(e, word.lower(), args.n)
        groups.append((word.lower(), neighbors))
        listing = ", ".join(f"{w} ({s:.3f})" for w, s in neighbors)
        print(f"  {word}: {listing}")
    if args.output:
        tmp = _tmp_path(args.output)
        with open(tmp, "w", encoding="utf-8") as f:
            f.write("query\trank\tneighbor\tcosine\n")
            for query, neighbors in groups:
                for rank, (w, s) in enumerate(neighbors, 1):
                    f.write(f"{query}\t{rank}\t{w}\t{s!r}\n")
        _finalize(tmp, args.output)
        _dump_config(args.output, args)
        if args.figures:
            plots.neighbor_bars(args.output.with_suffix(".png"), groups)
    _summary("eval neighbors", f"{len(groups)} quer(ies)", started)
    return 0


# ------------------------------------------------------------------ parser

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=Path, default=None,
                     help="key = value file supplying defaults for this command")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="ctxembed",
        description="skip-gram embeddings from window, dependency, and substitute contexts",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def register(name: str, sub: argparse.ArgumentParser) -> argparse.ArgumentParser:
        registry[name] = sub
        _add_common(sub)
        return sub

    p = register("vocab", subs.add_parser("vocab", formatter_class=fmt,
                                          help="build a vocabulary from a tokenized corpus"))
    p.add_argument("-i", "--input", type=Path, required=True, help="tokenized corpus, one sentence per line")
    p.add_argument("-o", "--output", type=Path, required=True, help="vocabulary file (word<TAB>count)")
    p.add_argument("--min-count", type=int, default=100, help="minimum corpus frequency")
    p.set_defaults(func=cmd_vocab)

    pairs = subs.add_parser("pairs", help="extract target-context pairs")
    pairs_subs = pairs.add_subparsers(dest="pair_type", required=True)

    p = register("pairs window", pairs_subs.add_parser("window", formatter_class=fmt,
                                                       help="window co-occurrence pairs"))
    p.add_argument("-i", "--input", type=Path, required=True, help="tokenized corpus")
    p.add_argument("--vocab", type=Path, required=True, help="vocabulary file")
    p.add_argument("-o", "--output", type=Path, required=True, help="pair file")
    p.add_argument("--window", type=int, default=5, help="maximum window size")
    p.add_argument("--fixed-window", action="store_true",
                   help="disable per-position random window shrinking")
    p.add_argument("--subsample", type=float, default=0.0,
                   help="frequent-word subsampling threshold (0 disables)")
    p.add_argument("--seed", type=int, default=1, help="random seed")
    p.set_defaults(func=cmd_pairs_window)

    p = register("pairs dep", pairs_subs.add_parser("dep", formatter_class=fmt,
                                                    help="syntactic dependency pairs"))
    p.add_argument("-i", "--input", type=Path, required=True, help="CoNLL-U-style parse file")
    p.add_argument("--vocab", type=Path, required=True, help="vocabulary file")
    p.add_argument("-o", "--output", type=Path, required=True, help="pair file")
    p.add_argument("--min-context-count", type=int, default=1,
                   help="minimum occurrences for a dependency context")
    p.add_argument("--no-collapse", action="store_true",
                   help="skip preposition collapsing")
    p.set_defaults(func=cmd_pairs_dep)

    p = register("pairs sub", pairs_subs.add_parser("sub", formatter_class=fmt,
                                                    help="weighted substitute pairs"))
    p.add_argument("-i", "--input", type=Path, required=True,
                   help="tokenized corpus the substitutes were generated from")
    p.add_argument("--vocab", type=Path, required=True, help="vocabulary file")
    p.add_argument("--substitutes", type=Path, required=True, help="substitute vector file")
    p.add_argument("-o", "--output", type=Path, required=True, help="pair file")
    p.add_argument("--cap-per-type", type=int, default=20000,
                   help="max substitute vectors per target word type")
    p.add_argument("--seed", type=int, default=1, help="random seed for the per-type reservoir")
    p.set_defaults(func=cmd_pairs_sub)

    p = register("substitutes", subs.add_parser("substitutes", formatter_class=fmt,
                                                help="generate substitute vectors with a Kneser-Ney model"))
    p.add_argument("-i", "--input", type=Path, required=True, help="tokenized corpus")
    p.add_argument("--vocab", type=Path, required=True, help="vocabulary file")
    p.add_argument("-o", "--output", type=Path, required=True, help="substitute vector file")
    p.add_argument("--order", type=int, default=4, help="n-gram order")
    p.add_argument("--top-k", type=int, default=10, help="substitutes kept per occurrence")
    p.add_argument("--discount", type=float, default=0.75, help="per-level discount")
    p.add_argument("--estimate-discount", action="store_true",
                   help="estimate discounts from count-of-counts")
    p.add_argument("--lm-in", type=Path, default=None, help="load a saved model instead of training")
    p.add_argument("--lm-out", type=Path, default=None, help="save the trained model")
    p.add_argument("--max-sentences", type=int, default=0,
                   help="only process the first N sentences (0 = all)")
    p.set_defaults(func=cmd_substitutes)

    p = register("train", subs.add_parser("train", formatter_class=fmt,
                                          help="train skip-gram embeddings from a pair file"))
    p.add_argument("-i", "--pairs", type=Path, required=True, help="pair file")
    p.add_argument("-o", "--output", type=Path, default=None,
                   help="embedding file (default: <pairs>-<dim>.vec)")
    p.add_argument("--dim", type=int, default=100, help="embedding dimensionality")
    p.add_argument("--negatives", type=int, default=5, help="negative samples per pair")
    p.add_argument("--epochs", type=int, default=3, help="passes over the pair stream")
    p.add_argument("--lr", type=float, default=0.025, help="initial learning rate")
    p.add_argument("--table-exponent", type=float, default=0.75,
                   help="context count exponent for negative sampling")
    p.add_argument("--min-count", type=int, default=1,
                   help="minimum pair-file frequency for targets and contexts")
    p.add_argument("--seed", type=int, default=1, help="random seed")
    p.add_argument("--workers", type=int, default=1,
                   help="lock-free parallel workers (>1 is nondeterministic)")
    p.add_argument("--engine", choices=("numba", "python"), default="numba",
                   help="training loop implementation")
    p.add_argument("--save-contexts", type=Path, default=None,
                   help="also save context embeddings here")
    p.set_defaults(func=cmd_train)

    comb = subs.add_parser("combine", help="combine two embedding sets")
    comb_subs = comb.add_subparsers(dest="combine_type", required=True)

    p = register("combine concat", comb_subs.add_parser("concat", formatter_class=fmt,
                                                        help="concatenate over the shared vocabulary"))
    p.add_argument("-a", type=Path, required=True, help="first embedding file")
    p.add_argument("-b", type=Path, required=True, help="second embedding file")
    p.add_argument("-o", "--output", type=Path, default=None,
                   help="output (default: <a>+<b>-<dim>.vec)")
    p.add_argument("--normalize", action="store_true",
                   help="length-normalize input rows first")
    p.set_defaults(func=cmd_combine_concat)

    p = register("combine svd", comb_subs.add_parser("svd", formatter_class=fmt,
                                                     help="SVD dimensionality reduction"))
    p.add_argument("-i", "--input", type=Path, required=True, help="embedding file")
    p.add_argument("-o", "--output", type=Path, default=None, help="output embedding file")
    p.add_argument("-k", type=int, required=True, help="output dimensionality")
    p.add_argument("--power", type=float, default=1.0, help="singular value exponent")
    p.add_argument("--no-center", action="store_true", help="skip column-mean centering")
    p.add_argument("--normalize", action="store_true",
                   help="length-normalize input rows first")
    p.set_defaults(func=cmd_combine_svd)

    p = register("combine cca", comb_subs.add_parser("cca", formatter_class=fmt,
                                                     help="canonical correlation projection"))
    p.add_argument("-a", type=Path, required=True, help="view-x embedding file")
    p.add_argument("-b", type=Path, required=True, help="view-y embedding file")
    p.add_argument("-o", "--output", type=Path, default=None, help="projected embedding file")
    p.add_argument("-k", type=int, default=50, help="projection dimensionality")
    p.add_argument("-r", type=float, default=1e-6, help="view-x regularizer (and view-y default)")
    p.add_argument("--ry", type=float, default=None, help="view-y regularizer")
    p.add_argument("--view", choices=("x", "y"), default="x", help="which projected view to save")
    p.add_argument("--model-out", type=Path, default=None, help="save the fitted model")
    p.add_argument("--tune", type=Path, default=None,
                   help="word-pair benchmark for grid-search tuning")
    p.add_argument("--k-grid", type=str, default="25,50,100",
                   help="comma-separated k values for tuning")
    p.add_argument("--r-grid", type=str, default="1e-8,1e-6,1e-4,1e-2",
                   help="comma-separated regularizers for tuning")
    p.add_argument("--report", type=Path, default=None, help="tuning report TSV")
    p.add_argument("--figures", action="store_true", help="render a tuning heatmap")
    p.add_argument("--normalize", action="store_true",
                   help="length-normalize input rows first")
    p.set_defaults(func=cmd_combine_cca)

    ev = subs.add_parser("eval", help="evaluate embeddings")
    ev_subs = ev.add_subparsers(dest="eval_type", required=True)

    p = register("eval wordsim", ev_subs.add_parser("wordsim", formatter_class=fmt,
                                                    help="word-pair similarity benchmarks"))
    p.add_argument("-e", "--embeddings", type=Path, required=True, help="embedding file")
    p.add_argument("-d", "--dataset", type=Path, action="append", required=True,
                   help="word-pair file (repeatable)")
    p.add_argument("-o", "--output", type=Path, default=None, help="report TSV")
    p.add_argument("--no-figures", dest="figures", action="store_false",
                   help="skip the report figure")
    p.set_defaults(func=cmd_eval_wordsim, figures=True)

    p = register("eval toefl", ev_subs.add_parser("toefl", formatter_class=fmt,
                                                  help="synonym selection items"))
    p.add_argument("-e", "--embeddings", type=Path, required=True, help="embedding file")
    p.add_argument("-d", "--dataset", type=Path, required=True, help="item file")
    p.add_argument("-o", "--output", type=Path, default=None, help="report TSV")
    p.add_argument("--no-figures", dest="figures", action="store_false",
                   help="skip the report figure")
    p.set_defaults(func=cmd_eval_toefl, figures=True)

    p = register("eval senti", ev_subs.add_parser("senti", formatter_class=fmt,
                                                  help="sentence sentiment with averaged embeddings"))
    p.add_argument("-e", "--embeddings", type=Path, required=True, help="embedding file")
    p.add_argument("--train", type=Path, required=True, help="training sentences")
    p.add_argument("--test", type=Path, required=True, help="evaluation sentences")
    p.add_argument("--l2", type=float, default=1e-4, help="L2 regularization strength")
    p.add_argument("--max-iter", type=int, default=500, help="maximum optimizer iterations")
    p.add_argument("--tol", type=float, default=1e-8, help="gradient norm stopping tolerance")
    p.add_argument("-o", "--output", type=Path, default=None, help="report TSV")
    p.add_argument("--no-figures", dest="figures", action="store_false",
                   help="skip the report figure")
    p.set_defaults(func=cmd_eval_senti, figures=True)

    p = register("eval neighbors", ev_subs.add_parser("neighbors", formatter_class=fmt,
                                                      help="nearest neighbors by cosine"))
    p.add_argument("-e", "--embeddings", type=Path, required=True, help="embedding file")
    p.add_argument("-w", "--word", action="append", required=True, help="query word (repeatable)")
    p.add_argument("-n", type=int, default=5, help="neighbors per query")
    p.add_argument("-o", "--output", type=Path, default=None, help="report TSV")
    p.add_argument("--no-figures", dest="figures", action="store_false",
                   help="skip the report figure")
    p.set_defaults(func=cmd_eval_neighbors, figures=True)

    return parser, registry


def main(argv: list[str] | None = None) -> int:
    parser, registry = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    if args.config is not None:
        name = args.command
        for extra in ("pair_type", "combine_type", "eval_type"):
            part = getattr(args, extra, None)
            if part:
                name = f"{name} {part}"
        try:
            _apply_config(registry[name], _load_config_file(args.config), args.config)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
