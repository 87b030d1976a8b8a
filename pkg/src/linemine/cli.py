"""Command-line interface argument parsing for linemine."""

##############################################################################
# Python imports.
import argparse
from pathlib import Path
from typing import Any

##############################################################################
# Local imports.
from linemine import __version__
from linemine.evaluation import Cohort
from linemine.run_config import run_config_defaults

# Default values for CLI arguments that are also RunConfig fields.
_RUN_CONFIG_DEFAULTS: dict[str, Any] = run_config_defaults()


def _extension_list(value: str) -> list[str]:
    """Parse a comma-separated list of file extensions.

    Args:
        value: The argument value, e.g. `.c,.h,.java`.

    Returns:
        The extensions.
    """
    return [extension.strip() for extension in value.split(",") if extension.strip()]


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the arguments every command takes.

    Args:
        parser: The argument parser to add arguments to.
    """
    parser.add_argument(
        "-c",
        "--config",
        type=Path,
        default=None,
        help="Path to configuration file (default: searches for linemine.yaml or linemine.yml)",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Show debug output on standard error",
    )
    verbosity.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Only show errors on standard error",
    )


def add_corpus_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the arguments of commands that read a corpus.

    Args:
        parser: The argument parser to add arguments to.
    """
    parser.add_argument(
        "--corpus",
        dest="corpus_root",
        type=Path,
        default=_RUN_CONFIG_DEFAULTS["corpus_root"],
        help="Root directory of the corpus",
    )
    add_filter_arguments(parser)


def add_filter_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the arguments that decide which files make up a snapshot.

    Args:
        parser: The argument parser to add arguments to.
    """
    parser.add_argument(
        "--extensions",
        type=_extension_list,
        default=_RUN_CONFIG_DEFAULTS["extensions"],
        help="Comma-separated file extensions to include (default: .c,.h,.java)",
    )
    parser.add_argument(
        "--max-file-bytes",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["max_file_bytes"],
        help="Leave out files larger than this many bytes (default: 2 MiB)",
    )


def add_policy_arguments(parser: argparse.ArgumentParser) -> None:
    """Add the arguments of the normalization policy.

    Args:
        parser: The argument parser to add arguments to.
    """
    parser.add_argument(
        "--no-trim-leading",
        dest="trim_leading",
        action="store_false",
        default=_RUN_CONFIG_DEFAULTS["trim_leading"],
        help="Keep leading whitespace when matching lines",
    )
    parser.add_argument(
        "--no-trim-trailing",
        dest="trim_trailing",
        action="store_false",
        default=_RUN_CONFIG_DEFAULTS["trim_trailing"],
        help="Keep trailing whitespace when matching lines",
    )
    parser.add_argument(
        "--min-len",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["min_len"],
        help="Don't index lines shorter than this after trimming (default: 1)",
    )


def add_db_argument(parser: argparse.ArgumentParser, flag: str = "--db") -> None:
    """Add the argument naming the Added Line Database.

    Args:
        parser: The argument parser to add arguments to.
        flag: The name of the flag.
    """
    parser.add_argument(
        flag,
        dest="db_path",
        type=Path,
        default=_RUN_CONFIG_DEFAULTS["db_path"],
        help="The Added Line Database (default: added_lines.jsonl in the corpus)",
    )


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser for linemine.

    Returns:
        Configured argument parser.
    """
    parser = argparse.ArgumentParser(
        prog="linemine",
        description="linemine - line-level code completion mined from revision history",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to run", required=True)

    # Ingest command
    ingest_parser = subparsers.add_parser(
        "ingest",
        help="Export the first-parent history of a git branch as a corpus",
    )
    ingest_parser.add_argument(
        "--git",
        dest="git_repo",
        type=Path,
        default=_RUN_CONFIG_DEFAULTS["git_repo"],
        help="The git repository to export",
    )
    ingest_parser.add_argument(
        "--branch",
        default=_RUN_CONFIG_DEFAULTS["branch"],
        help="The branch to export (default: main)",
    )
    ingest_parser.add_argument(
        "--limit",
        dest="commit_limit",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["commit_limit"],
        help="Export only the newest N commits (default: all of them)",
    )
    ingest_parser.add_argument(
        "--out",
        dest="out_root",
        type=Path,
        default=_RUN_CONFIG_DEFAULTS["out_root"],
        help="Directory to write the corpus to",
    )
    add_filter_arguments(ingest_parser)
    add_common_arguments(ingest_parser)

    # Extract command
    extract_parser = subparsers.add_parser(
        "extract",
        help="Build the Added Line Database of a corpus",
    )
    add_corpus_arguments(extract_parser)
    add_db_argument(extract_parser, "--out")
    extract_parser.add_argument(
        "-j",
        "--jobs",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["jobs"],
        help="Worker processes used to diff revisions (default: 1)",
    )
    extract_parser.add_argument(
        "--anchor-threshold",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["anchor_threshold"],
        help="Anchor the diff on unique lines above this many lines per side (default: 50000)",
    )
    add_common_arguments(extract_parser)

    # Suggest command
    suggest_parser = subparsers.add_parser(
        "suggest",
        help="Complete a prefix against one revision of a corpus",
    )
    add_corpus_arguments(suggest_parser)
    add_db_argument(suggest_parser)
    add_policy_arguments(suggest_parser)
    suggest_parser.add_argument(
        "--snapshot",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["snapshot"],
        help="The revision to search (default: the latest)",
    )
    suggest_parser.add_argument(
        "--prefix",
        default=_RUN_CONFIG_DEFAULTS["prefix"],
        help="The text typed so far",
    )
    suggest_parser.add_argument(
        "--limit",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["limit"],
        help="Show at most this many suggestions (default: 10)",
    )
    add_common_arguments(suggest_parser)

    # Evaluate command
    evaluate_parser = subparsers.add_parser(
        "evaluate",
        help="Replay the added lines of a corpus and measure the suggestions",
    )
    add_corpus_arguments(evaluate_parser)
    add_db_argument(evaluate_parser)
    add_policy_arguments(evaluate_parser)
    evaluate_parser.add_argument(
        "--k-min",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["k_min"],
        help="The smallest number of characters typed (default: 1)",
    )
    evaluate_parser.add_argument(
        "--k-max",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["k_max"],
        help="The largest number of characters typed (default: 11)",
    )
    evaluate_parser.add_argument(
        "--cohort",
        choices=[cohort.value for cohort in Cohort],
        default=_RUN_CONFIG_DEFAULTS["cohort"],
        help="Replay every suggestible line, or only those long enough for k-max (default: all)",
    )
    evaluate_parser.add_argument(
        "--out",
        dest="output",
        type=Path,
        default=_RUN_CONFIG_DEFAULTS["output"],
        help="The CSV file to write",
    )
    evaluate_parser.add_argument(
        "--svg",
        dest="svg_path",
        type=Path,
        default=_RUN_CONFIG_DEFAULTS["svg_path"],
        help="Also draw the results as an SVG chart",
    )
    evaluate_parser.add_argument(
        "--by-language",
        action="store_true",
        default=_RUN_CONFIG_DEFAULTS["by_language"],
        help="Also write one CSV per language of the added lines",
    )
    evaluate_parser.add_argument(
        "--summary-k",
        type=int,
        default=_RUN_CONFIG_DEFAULTS["summary_k"],
        help="The number of characters typed the summary reports precision for (default: 10)",
    )
    add_common_arguments(evaluate_parser)

    # Report command
    report_parser = subparsers.add_parser(
        "report",
        help="Average the results of several systems",
    )
    report_parser.add_argument(
        "inputs",
        type=Path,
        nargs="+",
        help="Results CSV files written by evaluate",
    )
    report_parser.add_argument(
        "--out",
        dest="output",
        type=Path,
        default=_RUN_CONFIG_DEFAULTS["output"],
        help="The averaged CSV file to write",
    )
    add_common_arguments(report_parser)

    # Stats command
    stats_parser = subparsers.add_parser(
        "stats",
        help="Describe a corpus",
    )
    add_corpus_arguments(stats_parser)
    add_common_arguments(stats_parser)

    parser.add_argument(
        "--version",
        action="version",
        version=f"linemine {__version__}",
    )

    return parser


### cli.py ends here
