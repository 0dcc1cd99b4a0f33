"""Command-line entry point.

Subcommands cover the batch pipelines: validate, stats, convert, split,
eval, iaa, gazetteer build/export, tag, silver, fuse, report.  Exit codes
are fixed so CI can gate on them: 0 success, 1 validation/data failure,
2 usage error.  All randomness flows through explicit ``--seed`` flags;
artifacts are written atomically; given identical inputs and flags every
subcommand writes byte-identical outputs.

A JSON file passed via ``--config`` supplies defaults for any long flag
(keys use underscores, e.g. ``{"label_filter": "Tool,Biblio"}``); flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus_io, evaluation, experiment, gazetteer, schema, tagger
from .model import Corpus, Provenance, validate_corpus
from .schema import BIOTOFLOW, SOFTCITE_QUALIFIERS, UnknownSourceLabel
from .standoff import StandoffParseError
from .stats import corpus_stats


class UsageError(ValueError):
    pass


_DATA_ERRORS = (StandoffParseError, evaluation.DocSetMismatch, tagger.DuplicateDocId,
                tagger.MissingPrediction, gazetteer.MalformedDump, UnknownSourceLabel,
                experiment.CorpusTooSmall, experiment.EmptyResults,
                experiment.MixedModes, FileNotFoundError, NotADirectoryError,
                json.JSONDecodeError, OSError, ValueError, KeyError)


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")


def _labels_arg(value) -> list[str] | None:
    if value is None:
        return None
    if isinstance(value, list):
        return value
    return [v for v in (s.strip() for s in value.split(",")) if v]


def _load_corpus(path, provenance: Provenance = Provenance.GOLD,
                 softcite: bool = False, jobs: int = 1):
    qualifiers = SOFTCITE_QUALIFIERS if softcite else None
    return corpus_io.load_corpus_dir(path, provenance=provenance,
                                     qualifiers=qualifiers, jobs=jobs)


def _cmd_validate(args) -> int:
    _require(args, "corpus")
    root = Path(args.corpus)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    bases = BIOTOFLOW.labels if args.schema == "biotoflow" else None
    # Lenient load: a file the parser rejects is a finding, not a crash.
    documents = []
    problems = 0
    n_docs = 0
    for txt_path in sorted(root.glob("*.txt")):
        n_docs += 1
        try:
            documents.append(corpus_io.load_document(
                txt_path, txt_path.with_suffix(".ann")))
        except StandoffParseError as exc:
            print(f"{type(exc).__name__} at {exc}")
            problems += 1
    violations = validate_corpus(Corpus(root.name, tuple(documents)), bases)
    for v in violations:
        print(v)
    problems += len(violations)
    print(f"{problems} violation(s) in {n_docs} document(s)")
    return 1 if problems else 0


def _cmd_stats(args) -> int:
    _require(args, "corpus")
    corpus = _load_corpus(args.corpus, jobs=args.jobs)
    report = corpus_stats(corpus)
    payload = report.to_json_dict()
    text = json.dumps(payload, ensure_ascii=False, indent=2)
    if args.out:
        corpus_io.atomic_write_text(args.out, text + "\n")
    print(text)
    return 0


def _cmd_convert(args) -> int:
    _require(args, "corpus", "out")
    corpus = _load_corpus(args.corpus, softcite=True, jobs=args.jobs)
    table = (schema.mapping_table_from_file(args.table) if args.table
             else schema.default_softcite_table())
    converted, report = schema.convert_corpus(corpus, table, strict=args.strict)
    corpus_io.write_corpus_dir(converted, args.out)
    if args.report:
        corpus_io.atomic_write_json(args.report, report.to_json_dict())
    print(json.dumps(report.to_json_dict(), ensure_ascii=False, indent=2))
    return 0


def _cmd_split(args) -> int:
    _require(args, "corpus", "out")
    corpus = _load_corpus(args.corpus, jobs=args.jobs)
    ratios = experiment.DEFAULT_RATIOS
    if args.ratios:
        parts = [float(x) for x in str(args.ratios).split(",")]
        if len(parts) != 2:
            raise UsageError("--ratios takes two comma-separated fractions")
        ratios = (parts[0], parts[1])
    manifests = experiment.make_splits(corpus, args.n, args.seed, ratios)
    out = Path(args.out)
    for m in manifests:
        corpus_io.atomic_write_json(out / f"split_{m.split_id}.json", m.to_json_dict())
    print(f"wrote {len(manifests)} manifest(s) to {out}")
    return 0


def _print_report(report, macro: bool, diff: bool) -> None:
    print(evaluation.render_report(report), end="")
    if macro:
        p, r, f1 = evaluation.macro_average(report)
        print(f"Macro           {100 * p:.1f}  {100 * r:.1f}  {100 * f1:.1f}")
    if diff:
        print(evaluation.render_diff(report), end="")


def _cmd_eval(args) -> int:
    _require(args, "gold", "pred")
    gold = _load_corpus(args.gold, jobs=args.jobs)
    pred = _load_corpus(args.pred, jobs=args.jobs)
    focus = _labels_arg(args.focus)
    modes = ([evaluation.MatchMode(args.mode)] if args.mode != "both"
             else [evaluation.MatchMode.STRICT, evaluation.MatchMode.RELAXED])
    payload = {}
    for mode in modes:
        report = evaluation.score(gold, pred, mode, focus, args.qualifier_sensitive)
        print(f"== {mode.value} ==")
        _print_report(report, args.macro, args.diff)
        payload[mode.value] = report.to_json_dict()
    if args.json:
        corpus_io.atomic_write_json(
            args.json, payload if len(modes) > 1 else payload[modes[0].value])
    return 0


def _cmd_iaa(args) -> int:
    _require(args, "annotator_a", "annotator_b")
    a = _load_corpus(args.annotator_a, jobs=args.jobs)
    b = _load_corpus(args.annotator_b, jobs=args.jobs)
    mode = evaluation.MatchMode(args.mode)
    report = evaluation.iaa(a, b, mode, _labels_arg(args.focus))
    _print_report(report, args.macro, args.diff)
    if args.json:
        corpus_io.atomic_write_json(args.json, report.to_json_dict())
    return 0


def _cmd_gazetteer_build(args) -> int:
    _require(args, "out")
    entries = []
    for kind in gazetteer.SOURCE_KINDS:
        path = getattr(args, kind, None)
        if path:
            entries.extend(gazetteer.ingest(kind, Path(path).read_text(encoding="utf-8")))
    if not entries:
        raise UsageError("no dump files given (--biotools/--bioconda/...)")
    common = None
    if args.common_words:
        common = frozenset(
            w.strip().casefold()
            for w in Path(args.common_words).read_text(encoding="utf-8").splitlines()
            if w.strip() and not w.startswith("#"))
    options = gazetteer.BuildOptions(
        min_length=args.min_length,
        drop_numeric=not args.keep_numeric,
        drop_common_words=not args.keep_common,
        common_words=common)
    gaz = gazetteer.build_gazetteer(entries, options)
    corpus_io.atomic_write_json(args.out, gaz.to_json_dict())
    print(f"gazetteer: {len(gaz)} entries "
          f"({json.dumps(gaz.normalization['filtered'])} filtered)")
    return 0


def _load_gazetteer(path) -> gazetteer.Gazetteer:
    with open(path, encoding="utf-8") as fh:
        return gazetteer.Gazetteer.from_json_dict(json.load(fh))


def _cmd_gazetteer_export(args) -> int:
    _require(args, "gazetteer", "out")
    gaz = _load_gazetteer(args.gazetteer)
    gazetteer.export_vocab(gaz, args.out, split_multiword=args.split_multiword)
    print(f"wrote {len(gazetteer.vocab_lines(gaz, args.split_multiword))} line(s) "
          f"to {args.out}")
    return 0


def _ruleset(args) -> tagger.RuleSet:
    if args.rules:
        return tagger.ruleset_from_file(args.rules)
    return tagger.default_ruleset()


def _cmd_tag(args) -> int:
    _require(args, "corpus", "gazetteer", "out")
    corpus = _load_corpus(args.corpus, jobs=args.jobs)
    predictor = tagger.TaggerPredictor(_load_gazetteer(args.gazetteer), _ruleset(args))
    tagged = tagger.silver_annotate(corpus, predictor)
    corpus_io.write_corpus_dir(tagged, args.out)
    print(f"tagged {len(tagged)} document(s) into {args.out}")
    return 0


def _cmd_silver(args) -> int:
    _require(args, "corpus", "out")
    corpus = _load_corpus(args.corpus, jobs=args.jobs)
    if args.predictions:
        path = Path(args.predictions)
        predictor = (tagger.ExternalPredictions.from_jsonl(path)
                     if path.suffix == ".jsonl"
                     else tagger.ExternalPredictions.from_dir(path))
    elif args.gazetteer:
        predictor = tagger.TaggerPredictor(_load_gazetteer(args.gazetteer), _ruleset(args))
    else:
        raise UsageError("need --predictions or --gazetteer")
    silver = tagger.silver_annotate(corpus, predictor)
    corpus_io.write_corpus_dir(silver, args.out)
    print(f"silver-annotated {len(silver)} document(s) into {args.out}")
    return 0


def _cmd_fuse(args) -> int:
    _require(args, "out")
    if not args.source:
        raise UsageError("at least one --source DIR[:role] is required")
    sources = []
    for raw in args.source:
        path, _, role_name = raw.partition(":")
        role = Provenance(role_name) if role_name else None
        corpus = _load_corpus(path, provenance=role or Provenance.GOLD)
        sources.append(tagger.FusionSource(corpus=corpus, role=role))
    config = tagger.FusionConfig(
        mode=tagger.FusionMode(args.mode), sources=tuple(sources),
        for_training=args.for_training, prefix_on_collision=args.prefix_collisions)
    fused = tagger.fuse(config)
    corpus_io.write_corpus_dir(fused, args.out)
    counts = tagger.provenance_counts(fused)
    print(json.dumps({"documents": len(fused), "provenance": dict(sorted(counts.items()))}))
    return 0


def _cmd_report(args) -> int:
    _require(args, "results")
    paths: list[Path] = []
    for raw in args.results:
        p = Path(raw)
        paths.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    results = []
    for p in paths:
        with open(p, encoding="utf-8") as fh:
            results.append(experiment.RunResult.from_json_dict(json.load(fh)))
    table = experiment.aggregate(results, _labels_arg(args.focus),
                                 per_split=args.per_split)
    rendered = experiment.render_table(table, layout=args.layout)
    if args.out:
        corpus_io.atomic_write_text(args.out, rendered)
    print(rendered, end="")
    return 0


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file supplying flag defaults")
    common.add_argument("--jobs", type=int, default=1,
                        help="per-document parallelism (output is identical for any N)")

    parser = argparse.ArgumentParser(
        prog="flowner",
        description="Corpus engineering and evaluation for workflow-article NER")
    sub = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, argparse.ArgumentParser] = {}

    def add(name: str, func, **kwargs) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], **kwargs)
        p.set_defaults(func=func)
        registry[name] = p
        return p

    p = add("validate", _cmd_validate, help="check corpus invariants")
    p.add_argument("--corpus")
    p.add_argument("--schema", choices=["biotoflow", "none"], default="none",
                   help="also check labels against the built-in schema")

    p = add("stats", _cmd_stats, help="per-label counts, tokens, nesting fraction")
    p.add_argument("--corpus")
    p.add_argument("--out")

    p = add("convert", _cmd_convert, help="map a SoftCite-style corpus into the schema")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--table", help="mapping table JSON (default: built-in)")
    p.add_argument("--strict", action="store_true",
                   help="fail on source labels without any rule")
    p.add_argument("--report", help="write the conversion report JSON here")

    p = add("split", _cmd_split, help="write reproducible split manifests")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--ratios", help="train_frac,dev_frac_within_train (default 0.75,0.3333)")

    p = add("eval", _cmd_eval, help="score predictions against gold")
    p.add_argument("--gold")
    p.add_argument("--pred")
    p.add_argument("--mode", choices=["strict", "relaxed", "both"], default="both")
    p.add_argument("--focus", help="comma-separated label subset for the overall row")
    p.add_argument("--qualifier-sensitive", action="store_true")
    p.add_argument("--macro", action="store_true", help="also print macro averages")
    p.add_argument("--diff", action="store_true", help="list missed/spurious entities")
    p.add_argument("--json", help="write the report JSON here")

    p = add("iaa", _cmd_iaa, help="inter-annotator agreement between two annotation sets")
    p.add_argument("--annotator-a", dest="annotator_a")
    p.add_argument("--annotator-b", dest="annotator_b")
    p.add_argument("--mode", choices=["strict", "relaxed"], default="relaxed")
    p.add_argument("--focus")
    p.add_argument("--macro", action="store_true")
    p.add_argument("--diff", action="store_true")
    p.add_argument("--json")

    p = add("gazetteer", lambda args: 0, help="build or export a gazetteer")
    gsub = p.add_subparsers(dest="gazetteer_command", required=True)
    gb = gsub.add_parser("build", parents=[common])
    gb.set_defaults(func=_cmd_gazetteer_build)
    registry["gazetteer build"] = gb
    for kind in gazetteer.SOURCE_KINDS:
        gb.add_argument(f"--{kind}", help=f"{kind} dump file")
    gb.add_argument("--out")
    gb.add_argument("--min-length", type=int, default=2)
    gb.add_argument("--keep-numeric", action="store_true")
    gb.add_argument("--keep-common", action="store_true")
    gb.add_argument("--common-words", help="override the shipped common-word list")
    ge = gsub.add_parser("export", parents=[common])
    ge.set_defaults(func=_cmd_gazetteer_export)
    registry["gazetteer export"] = ge
    ge.add_argument("--gazetteer")
    ge.add_argument("--out")
    ge.add_argument("--split-multiword", action="store_true")

    p = add("tag", _cmd_tag, help="run the dictionary/rule tagger")
    p.add_argument("--corpus")
    p.add_argument("--gazetteer")
    p.add_argument("--rules", help="rule set JSON (default: built-in)")
    p.add_argument("--out")

    p = add("silver", _cmd_silver, help="silver-annotate a corpus with a predictor")
    p.add_argument("--corpus")
    p.add_argument("--out")
    p.add_argument("--predictions", help="standoff dir or .jsonl of model predictions")
    p.add_argument("--gazetteer", help="use the built-in tagger with this gazetteer")
    p.add_argument("--rules")

    p = add("fuse", _cmd_fuse, help="concatenate corpora, tracking provenance")
    p.add_argument("--source", action="append",
                   help="corpus dir, optionally DIR:role (gold|silver|converted)")
    p.add_argument("--out")
    p.add_argument("--mode", choices=[m.value for m in tagger.FusionMode],
                   default="converted_only")
    p.add_argument("--for-training", action="store_true")
    p.add_argument("--prefix-collisions", action="store_true")

    p = add("report", _cmd_report, help="aggregate run results into a mean±std table")
    p.add_argument("--results", nargs="+", help="RunResult JSON files or directories")
    p.add_argument("--focus")
    p.add_argument("--layout", choices=["text", "markdown", "csv"], default="text")
    p.add_argument("--per-split", action="store_true",
                   help="std over per-split means instead of pooled runs")
    p.add_argument("--out")

    return parser, registry


def _apply_config(argv: list[str], registry: dict[str, argparse.ArgumentParser]) -> None:
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return  # let argparse produce the usage error
    with open(argv[idx + 1], encoding="utf-8") as fh:
        config = json.load(fh)
    if not isinstance(config, dict):
        raise UsageError("--config must contain a JSON object")
    for sub in registry.values():
        valid = {a.dest for a in sub._actions}
        sub.set_defaults(**{k: v for k, v in config.items() if k in valid})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, registry = _build_parser()
    try:
        _apply_config(argv, registry)
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
