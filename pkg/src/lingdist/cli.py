"""Command-line entry point: ``lingdist <subcommand> ...``.

Every flag can also come from a ``--config`` file of ``key = value`` lines
(keys are flag names without the leading dashes); the command line wins.
Logs are ``key=value`` lines on stderr, level from ``LINGDIST_LOG``.
Exit codes: 0 success, 1 user or data error, 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import traceback
from pathlib import Path

from . import conceptualizer as cz
from . import evaluation as ev
from . import ingest
from .errors import LingDistError
from .metrics import METRIC_KINDS, MetricSpec, build_distance_matrix
from .model import concatenate_language_vector
from .parallel import default_jobs

log = logging.getLogger("lingdist")

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

DEFAULTS = {
    "validate": {},
    "conceptualize": {
        "targets": "", "reference": None, "min_n": 1, "max_n": 10, "min_count": 2,
        "min_score": cz.CHI2_95, "max_targets": 5, "dims": 100, "strict": False,
    },
    "distances": {"languages": None, "concepts": None, "top_n": 50, "min_shared": 1},
    "evaluate": {"k_list": "2,4,6,8,10", "neighbors": False, "neighbor_k": 10},
    "coverage": {"detailed": False},
    "tradeoff": {"n_list": "1,5,10,20,30,40,50,60,70,80,90,100"},
}

REQUIRED = {
    "conceptualize": ("corpus", "concepts", "source_lang", "out"),
    "distances": ("metric", "input", "out"),
    "evaluate": ("matrix", "lineages", "families", "report_dir"),
    "coverage": ("features", "lineages", "families", "out"),
    "tradeoff": ("features", "out"),
}


class UsageError(LingDistError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    value = str(raw).strip().lower()
    if value in {"1", "true", "yes", "on"}:
        return True
    if value in {"0", "false", "no", "off"}:
        return False
    raise UsageError(f"not a boolean: {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lingdist", description="Language distance toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(p):
        p.add_argument("--config", help="file of key = value defaults")
        p.add_argument("--jobs", type=int, help="worker processes (default: available CPUs)")

    p = sub.add_parser("validate", help="parse input files and report problems")
    common(p)
    for kind in ("wordlist", "features", "lineages", "vectors", "corpus", "matrix"):
        p.add_argument(f"--{kind}", action="append", default=None, metavar="PATH")

    p = sub.add_parser("conceptualize", help="build concept vectors from a parallel corpus")
    common(p)
    p.add_argument("--corpus")
    p.add_argument("--concepts", help="concept<TAB>query file")
    p.add_argument("--source-lang")
    p.add_argument("--targets", help="comma-separated target languages, or 'all'")
    p.add_argument("--reference", help="languages used to fix dimension labels (default: targets)")
    p.add_argument("--out")
    p.add_argument("--min-n", type=int)
    p.add_argument("--max-n", type=int)
    p.add_argument("--min-count", type=int)
    p.add_argument("--min-score", type=float)
    p.add_argument("--max-targets", type=int)
    p.add_argument("--dims", type=int, help="dimensions per concept")
    p.add_argument("--strict", action="store_const", const=True, default=None)

    p = sub.add_parser("distances", help="compute a pairwise distance matrix")
    common(p)
    p.add_argument("--metric", choices=sorted(METRIC_KINDS))
    p.add_argument("--input")
    p.add_argument("--languages", help="comma-separated list or @file (one id per line)")
    p.add_argument("--concepts", help="concept subset for conceptual metrics (list or @file)")
    p.add_argument("--top-n", type=int, help="most frequent features kept (feature_hamming)")
    p.add_argument("--min-shared", type=int, help="minimum shared concepts (word-list metrics)")
    p.add_argument("--out")

    p = sub.add_parser("evaluate", help="kNN family classification reports")
    common(p)
    p.add_argument("--matrix")
    p.add_argument("--lineages")
    p.add_argument("--families", help="comma-separated top-level family names")
    p.add_argument("--k-list")
    p.add_argument("--report-dir")
    p.add_argument("--neighbors", action="store_const", const=True, default=None)
    p.add_argument("--neighbor-k", type=int)

    p = sub.add_parser("coverage", help="per-family feature coverage")
    common(p)
    p.add_argument("--features")
    p.add_argument("--lineages")
    p.add_argument("--families")
    p.add_argument("--out")
    p.add_argument("--detailed", action="store_const", const=True, default=None)

    p = sub.add_parser("tradeoff", help="feature-count vs comparable-language curve")
    common(p)
    p.add_argument("--features")
    p.add_argument("--n-list")
    p.add_argument("--out")
    return parser


def _subparser(parser, command):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def read_config_file(path) -> dict[str, str]:
    values = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}: line {line_no}: expected key = value")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def resolve(parser, argv) -> argparse.Namespace:
    """Command line > config file > built-in defaults."""
    args = parser.parse_args(argv)
    command = args.command
    actions = {a.dest: a for a in _subparser(parser, command)._actions}
    if args.config:
        for key, raw in read_config_file(args.config).items():
            if key not in actions or key in ("config", "help"):
                raise UsageError(f"unknown config key {key!r} for {command}")
            if getattr(args, key) is not None:
                continue
            action = actions[key]
            if isinstance(action, argparse._StoreConstAction):
                value = _bool(raw)
            elif isinstance(action, argparse._AppendAction):
                value = [v.strip() for v in raw.split(",") if v.strip()]
            else:
                value = action.type(raw) if action.type else raw
                if action.choices and value not in action.choices:
                    raise UsageError(f"config {key}: {value!r} not in {sorted(action.choices)}")
            setattr(args, key, value)
    for key, value in DEFAULTS[command].items():
        if getattr(args, key) is None:
            setattr(args, key, value)
    if args.jobs is None:
        args.jobs = default_jobs()
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    missing = [k for k in REQUIRED.get(command, ()) if getattr(args, k) is None]
    if missing:
        raise UsageError(f"{command}: missing required option(s): "
                         + ", ".join("--" + k.replace("_", "-") for k in missing))
    return args


def _kv(**fields) -> str:
    parts = []
    for key, value in fields.items():
        text = str(value)
        if not text or any(c.isspace() or c in '"=' for c in text):
            text = '"' + text.replace('"', '\\"') + '"'
        parts.append(f"{key}={text}")
    return " ".join(parts)


def _open_read(path):
    return open(path, encoding="utf-8", newline="")


def _write_text(path, text: str) -> None:
    if str(path) == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _list_arg(raw) -> list[str]:
    """Comma-separated list, or ``@path`` with one item per line."""
    if raw is None:
        return []
    if raw.startswith("@"):
        with _open_read(raw[1:]) as fh:
            return [line.strip() for line in fh.read().splitlines() if line.strip()]
    return [item.strip() for item in raw.split(",") if item.strip()]


def _int_list(raw, name) -> list[int]:
    try:
        values = [int(v) for v in _list_arg(raw)]
    except ValueError:
        raise UsageError(f"--{name} must be a comma-separated list of integers") from None
    if not values or any(v < 1 for v in values):
        raise UsageError(f"--{name} needs positive integers")
    return values


# -- subcommands ---------------------------------------------------------------

PARSERS = {
    "wordlist": (ingest.parse_wordlist, lambda t: (len(t.entries), len(t.concepts))),
    "features": (ingest.parse_feature_table, lambda t: (len(t.languages), len(t.features))),
    "lineages": (ingest.parse_lineages, lambda t: (len(t), max((len(p.lineage) for p in t.values()), default=0))),
    "vectors": (ingest.parse_concept_vectors, lambda t: (len(t.vectors), len(t.concept_set))),
    "corpus": (ingest.parse_parallel_corpus, lambda t: (len(t.verses), len(t.languages))),
    "matrix": (ingest.read_distance_matrix, lambda t: (len(t.index), len(t.index))),
}


def cmd_validate(args) -> int:
    ok = True
    for kind, (parse, shape) in PARSERS.items():
        for path in getattr(args, kind) or ():
            try:
                with _open_read(path) as fh:
                    parsed = parse(fh)
            except (LingDistError, OSError) as exc:
                ok = False
                line = getattr(exc, "line_no", None)
                print(_kv(file=path, kind=kind, status="error", line=line if line else "-",
                          message=exc), file=sys.stderr)
                continue
            rows, cols = shape(parsed)
            print(_kv(file=path, kind=kind, status="ok", rows=rows, columns=cols))
    return 0 if ok else 1


def cmd_conceptualize(args) -> int:
    with _open_read(args.corpus) as fh:
        corpus = ingest.parse_parallel_corpus(fh)
    with _open_read(args.concepts) as fh:
        concept_list = ingest.parse_concept_list(fh)
    if args.targets.strip() == "all":
        targets = sorted(corpus.languages - {args.source_lang})
    else:
        targets = _list_arg(args.targets)
    unknown = [t for t in targets if t not in corpus.languages]
    if args.source_lang not in corpus.languages:
        unknown.insert(0, args.source_lang)
    if unknown:
        raise UsageError(f"languages not in corpus: {', '.join(unknown)}")
    references = _list_arg(args.reference) if args.reference else None
    config = cz.ConceptualizerConfig(
        min_n=args.min_n, max_n=args.max_n, min_count=args.min_count,
        min_score=args.min_score, max_targets=args.max_targets, dims_per_concept=args.dims,
    )
    queries = [cz.ConceptQuery(c, q, args.source_lang) for c, q in concept_list]
    run = cz.conceptualize(corpus, queries, targets, references, config, jobs=args.jobs)
    _write_text(args.out, ingest.to_text(ingest.write_concept_vectors, run.vectors))
    log.info(_kv(event="written", out=args.out, concepts=len(run.vectors.concept_set),
                 vectors=len(run.vectors.vectors), failures=len(run.failures)))
    if run.failures and args.strict:
        log.error(_kv(event="strict_failure", failures=len(run.failures)))
        return 1
    return 0


def _load_distance_input(metric, path):
    with _open_read(path) as fh:
        if metric in ("cosine_conceptual", "hamming_conceptual"):
            return ingest.parse_concept_vectors(fh)
        if metric in ("ldn_mean", "lcs_mean"):
            return ingest.parse_wordlist(fh)
        if metric in ("path_jaccard", "lca_edges"):
            return ingest.parse_lineages(fh)
        return ingest.parse_feature_table(fh)


def cmd_distances(args) -> int:
    metric = args.metric
    data = _load_distance_input(metric, args.input)
    explicit = _list_arg(args.languages) if args.languages else None
    params = {}
    if metric in ("cosine_conceptual", "hamming_conceptual"):
        concepts = _list_arg(args.concepts) if args.concepts else list(data.concept_set)
        params["concepts"] = tuple(concepts)
        candidates = explicit or sorted(data.languages)
        if explicit is None:
            kept = []
            for lang in candidates:
                try:
                    vec = concatenate_language_vector(data, lang, concepts)
                except LingDistError as exc:
                    log.warning(_kv(event="dropped", lang=lang, reason=exc))
                    continue
                if metric == "cosine_conceptual" and not vec.any():
                    log.warning(_kv(event="dropped", lang=lang, reason="all-zero vector"))
                    continue
                kept.append(lang)
            candidates = kept
        languages = candidates
    elif metric == "feature_hamming":
        features = ev.select_most_frequent_features(data, args.top_n)
        params["features"] = tuple(features)
        comparable = ev.comparable_languages(data, features)
        pool = explicit if explicit is not None else list(data.languages)
        languages = sorted(l for l in pool if l in comparable)
        log.info(_kv(event="comparability", top_n=args.top_n, candidates=len(pool),
                     retained=len(languages)))
    elif metric in ("ldn_mean", "lcs_mean"):
        params["min_shared"] = args.min_shared
        languages = explicit or sorted(data.languages)
    else:
        languages = explicit or sorted(data)
    spec = MetricSpec(metric, params)
    matrix = build_distance_matrix(spec, data, languages, jobs=args.jobs)
    _write_text(args.out, ingest.to_text(ingest.write_distance_matrix, matrix))
    log.info(_kv(event="written", out=args.out, metric=metric, languages=len(languages)))
    return 0


def cmd_evaluate(args) -> int:
    with _open_read(args.matrix) as fh:
        matrix = ingest.read_distance_matrix(fh)
    with _open_read(args.lineages) as fh:
        lineages = ingest.parse_lineages(fh)
    families = _list_arg(args.families)
    if not families:
        raise UsageError("--families is empty")
    ks = _int_list(args.k_list, "k-list")
    out = Path(args.report_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for k in ks:
        report = ev.family_accuracy(matrix, lineages, families, k)
        reports.append(report)
        _write_text(out / f"accuracy_k{k}.csv", report.to_csv())
        _write_text(out / f"accuracy_k{k}.txt", ev.accuracy_table([report]))
        log.info(_kv(event="accuracy", k=k, metric=matrix.metric_tag, overall=f"{report.overall:.4f}"))
    _write_text(out / "accuracy.txt", ev.accuracy_table(reports))
    if args.neighbors:
        dist = ev.neighbor_family_distribution(matrix, lineages, families, args.neighbor_k)
        _write_text(out / f"neighbors_k{args.neighbor_k}.csv", dist.to_csv())
        _write_text(out / f"neighbors_k{args.neighbor_k}.txt", dist.to_text())
    return 0


def cmd_coverage(args) -> int:
    with _open_read(args.features) as fh:
        table = ingest.parse_feature_table(fh)
    with _open_read(args.lineages) as fh:
        lineages = ingest.parse_lineages(fh)
    families = _list_arg(args.families)
    if not families:
        raise UsageError("--families is empty")
    details = {fam: ev.feature_coverage_detail(table, lineages, fam) for fam in families}
    header = ["feature"]
    for fam in families:
        header += [f"{fam}:coded", f"{fam}:unknown", f"{fam}:missing"] if args.detailed else [fam]
    lines = [",".join(_csv_cell(h) for h in header)]
    for feat in table.features:
        row = [feat]
        for fam in families:
            d = details[fam][feat]
            values = (d.coded, d.unknown, d.missing) if args.detailed else (d.coded,)
            row += [format(v, ".9g") for v in values]
        lines.append(",".join(_csv_cell(c) for c in row))
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _csv_cell(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def cmd_tradeoff(args) -> int:
    with _open_read(args.features) as fh:
        table = ingest.parse_feature_table(fh)
    n_values = _int_list(args.n_list, "n-list")
    if n_values != sorted(n_values):
        raise UsageError("--n-list must be sorted ascending")
    curve = ev.feature_tradeoff_curve(table, n_values)
    _write_text(args.out, ev.tradeoff_csv(curve))
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "conceptualize": cmd_conceptualize,
    "distances": cmd_distances,
    "evaluate": cmd_evaluate,
    "coverage": cmd_coverage,
    "tradeoff": cmd_tradeoff,
}


def _setup_logging():
    level = LOG_LEVELS.get(os.environ.get("LINGDIST_LOG", "info").strip().lower(), logging.INFO)
    root = logging.getLogger("lingdist")
    root.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("level=%(levelname)s %(message)s"))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = resolve(build_parser(), argv)
        resolved = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
        log.info(_kv(event="config", command=args.command, **resolved))
        return COMMANDS[args.command](args)
    except (LingDistError, OSError) as exc:
        log.error(_kv(event="failed", error=type(exc).__name__, message=exc))
        return 1
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code 2
        log.error(_kv(event="internal_error", error=type(exc).__name__, message=exc))
        log.debug(traceback.format_exc())
        return 2


if __name__ == "__main__":
    sys.exit(main())
