"""Command-line interface for linemine."""

##############################################################################
# Python imports.
import argparse
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

##############################################################################
# Local imports.
from linemine.adddb import DatabaseError, build_db, db_stats, read_db, write_db
from linemine.chart import render_chart
from linemine.cli import create_parser
from linemine.config import ConfigError, build_run_config, load_config, merge_config_with_args
from linemine.corpus import CorpusError, language_of, load_manifest
from linemine.diff import RevisionPairMismatchError
from linemine.engine import InvalidPrefixError, build_revision_index, query_prefix
from linemine.evaluation import Cohort, sweep_groups, system_summary
from linemine.ingest import IngestError, export_git_history
from linemine.report import ReportError, ReportSettings, average_reports, format_report, read_rows_csv, write_rows_csv
from linemine.run_config import RunConfig
from linemine.stats import compute_corpus_stats
from linemine.utils import setup_logging, timed_step

##############################################################################
# Exit code for success, including runs with empty results.
EXIT_OK = 0

##############################################################################
# Exit code for a usage or input error.
EXIT_ERROR = 2

##############################################################################
# The exceptions reported as an error message rather than a traceback.
_REPORTED_ERRORS: tuple[type[Exception], ...] = (
    ConfigError,
    CorpusError,
    IngestError,
    DatabaseError,
    RevisionPairMismatchError,
    InvalidPrefixError,
    ReportError,
)


def _require(value: Path | None, what: str) -> Path:
    """Insist that a path has been given, on the command line or in the config file."""
    if value is None:
        raise ConfigError(f"{what} is required. Specify it on the command line or in the config file.")
    return value


def _cmd_ingest(run_config: RunConfig, args: argparse.Namespace) -> int:
    """Export the history of a git branch as a corpus."""
    with timed_step("Exporting history"):
        manifest = export_git_history(
            _require(run_config.git_repo, "--git"),
            run_config.branch,
            run_config.commit_limit,
            run_config.file_filter,
            _require(run_config.out_root, "--out"),
        )
    print(f"exported {len(manifest)} revisions")
    return EXIT_OK


def _cmd_extract(run_config: RunConfig, args: argparse.Namespace) -> int:
    """Build and write the Added Line Database of a corpus."""
    corpus_root = _require(run_config.corpus_root, "--corpus")
    manifest = load_manifest(corpus_root)
    if len(manifest) < 2:
        raise CorpusError(f"insufficient-history: {corpus_root} has {len(manifest)} revision(s)")
    with timed_step(f"Comparing {len(manifest) - 1} revision pairs"):
        db = build_db(corpus_root, manifest, run_config.file_filter, run_config.jobs, run_config.anchor_threshold)
    db_path = run_config.resolved_db_path
    db_path.parent.mkdir(parents=True, exist_ok=True)
    write_db(db, db_path)
    stats = db_stats(db)
    for desc in manifest[1:]:
        print(f"{desc.index}\t{desc.label}\t{stats.per_revision.get(desc.index, 0)}")
    print(f"total\t{stats.total}")
    return EXIT_OK


def _cmd_suggest(run_config: RunConfig, args: argparse.Namespace) -> int:
    """Print the ranked completions of a prefix."""
    corpus_root = _require(run_config.corpus_root, "--corpus")
    if not run_config.prefix:
        raise InvalidPrefixError("invalid-prefix: the prefix must not be empty")
    manifest = load_manifest(corpus_root)
    db = read_db(run_config.resolved_db_path)
    db.check_range(len(manifest))
    revision = len(manifest) - 1 if run_config.snapshot is None else run_config.snapshot
    index = build_revision_index(corpus_root, manifest, db, revision, run_config.policy, run_config.file_filter)
    for suggestion in query_prefix(index, run_config.prefix, run_config.limit):
        print(f"{suggestion.rank}\t{suggestion.recency}\t{suggestion.file}:{suggestion.line_no}\t{suggestion.text}")
    return EXIT_OK


def _language_csv(output: Path, language: str) -> Path:
    """Name the results file of one language, next to the main one."""
    return output.with_name(f"{output.stem}.{language.lstrip('.')}{output.suffix}")


def _cmd_evaluate(run_config: RunConfig, args: argparse.Namespace) -> int:
    """Sweep the prefix lengths and write the results."""
    corpus_root = _require(run_config.corpus_root, "--corpus")
    output = _require(run_config.output, "--out")
    db = read_db(run_config.resolved_db_path)
    cohort = Cohort(run_config.cohort)
    settings = ReportSettings(policy=run_config.policy, file_filter=run_config.file_filter, cohort=cohort)

    groups: dict[str, Callable[[str], bool]] = {"": lambda _: True}
    languages = sorted({language_of(record.file) for record in db}) if run_config.by_language else []
    for language in languages:
        groups[language] = lambda path, language=language: language_of(path) == language

    with timed_step(f"Evaluating k={run_config.k_min}..{run_config.k_max}"):
        results = sweep_groups(
            corpus_root,
            db,
            run_config.k_min,
            run_config.k_max,
            run_config.policy,
            cohort,
            run_config.file_filter,
            groups,
        )

    output.parent.mkdir(parents=True, exist_ok=True)
    overall = results[""]
    rows = overall.rows
    write_rows_csv(rows, output)
    for language in languages:
        write_rows_csv(results[language].rows, _language_csv(output, language))
    if run_config.svg_path is not None:
        run_config.svg_path.parent.mkdir(parents=True, exist_ok=True)
        run_config.svg_path.write_bytes(render_chart(rows, settings).encode("utf-8"))
    print(format_report(settings, rows, system_summary(rows, run_config.summary_k, overall.reach)), end="")
    return EXIT_OK


def _cmd_report(run_config: RunConfig, args: argparse.Namespace) -> int:
    """Average the results of several systems."""
    output = _require(run_config.output, "--out")
    averaged = average_reports([read_rows_csv(path) for path in args.inputs])
    output.parent.mkdir(parents=True, exist_ok=True)
    write_rows_csv(averaged, output, with_f1_of_means=True)
    print(f"averaged {len(args.inputs)} result files over {len(averaged)} prefix lengths")
    return EXIT_OK


def _cmd_stats(run_config: RunConfig, args: argparse.Namespace) -> int:
    """Describe a corpus."""
    stats = compute_corpus_stats(_require(run_config.corpus_root, "--corpus"), run_config.file_filter)
    print(f"revisions\t{stats.revisions}")
    print(f"first\t{stats.first_label}")
    print(f"last\t{stats.last_label}")
    print(f"files\t{stats.files}")
    print(f"lines\t{stats.lines}")
    for language, lines in stats.lines_per_language.items():
        print(f"lines[{language}]\t{lines}")
    if stats.skipped_files:
        print(f"skipped\t{stats.skipped_files}")
    return EXIT_OK


##############################################################################
# The handler of each command.
_COMMANDS: dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "ingest": _cmd_ingest,
    "extract": _cmd_extract,
    "suggest": _cmd_suggest,
    "evaluate": _cmd_evaluate,
    "report": _cmd_report,
    "stats": _cmd_stats,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the linemine CLI.

    Args:
        argv: The command-line arguments; `None` uses `sys.argv`.

    Returns:
        The exit code.
    """
    parser = create_parser()
    args = parser.parse_args(argv)
    setup_logging(1 if args.verbose else -1 if args.quiet else 0)

    # Expand user home directory in path arguments from CLI
    for name in ("corpus_root", "db_path", "out_root", "git_repo", "output", "svg_path", "config"):
        if (value := getattr(args, name, None)) is not None:
            setattr(args, name, value.expanduser())

    try:
        merge_config_with_args(load_config(args.config), args)
        run_config = build_run_config(args)
        return _COMMANDS[args.command](run_config, args)
    except _REPORTED_ERRORS as error:
        print(f"Error: {error}", file=sys.stderr)
    except OSError as error:
        print(f"Error: io-error: {error}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())


### __main__.py ends here
