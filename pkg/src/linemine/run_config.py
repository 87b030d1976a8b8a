"""Run configuration data structure for linemine."""

##############################################################################
# Python imports.
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

##############################################################################
# Local imports.
from linemine.corpus import DEFAULT_EXTENSIONS, DEFAULT_MAX_FILE_BYTES, FileFilter
from linemine.diff import DEFAULT_ANCHOR_THRESHOLD
from linemine.engine import NormalizationPolicy
from linemine.evaluation import DEFAULT_SUMMARY_K, Cohort

##############################################################################
# Name of the Added Line Database inside a corpus, when no path is given.
DEFAULT_DB_NAME = "added_lines.jsonl"


@dataclass
class RunConfig:
    """Everything a linemine command needs to know about a run.

    Every field has a default, so a partially-filled configuration (from
    the command line, a configuration file, or both) is always usable.
    """

    corpus_root: Path | None = None
    """Root directory of the corpus."""

    db_path: Path | None = None
    """The Added Line Database.

    When `None`, `added_lines.jsonl` inside the corpus is used.
    """

    k_min: int = 1
    """The smallest prefix length to evaluate."""

    k_max: int = 11
    """The largest prefix length to evaluate."""

    trim_leading: bool = True
    """Remove leading whitespace from lines before matching."""

    trim_trailing: bool = True
    """Remove trailing whitespace from lines before matching."""

    min_len: int = 1
    """Lines shorter than this after trimming are not indexed."""

    cohort: str = Cohort.ALL.value
    """Which suggestible lines are replayed at every prefix length."""

    extensions: list[str] = field(default_factory=lambda: sorted(DEFAULT_EXTENSIONS))
    """File extensions that make up a snapshot."""

    max_file_bytes: int = DEFAULT_MAX_FILE_BYTES
    """Files larger than this are left out of a snapshot."""

    limit: int = 10
    """The most suggestions `suggest` shows."""

    out_root: Path | None = None
    """Where `ingest` writes the corpus."""

    git_repo: Path | None = None
    """The git repository `ingest` exports."""

    branch: str = "main"
    """The branch whose first-parent history is exported."""

    commit_limit: int | None = None
    """How many of the newest commits to export; `None` for all of them."""

    output: Path | None = None
    """Where `extract`, `evaluate` and `report` write their results."""

    svg_path: Path | None = None
    """Where `evaluate` writes its chart, if anywhere."""

    snapshot: int | None = None
    """The revision `suggest` searches."""

    prefix: str | None = None
    """The text `suggest` completes."""

    jobs: int = 1
    """Worker processes used by `extract`."""

    anchor_threshold: int = DEFAULT_ANCHOR_THRESHOLD
    """Line count above which the diff anchors on unique lines."""

    summary_k: int = DEFAULT_SUMMARY_K
    """The prefix length the per-system summary reports precision for."""

    by_language: bool = False
    """Also evaluate the added lines of each language separately."""

    @property
    def policy(self) -> NormalizationPolicy:
        """The normalization policy of the run."""
        return NormalizationPolicy(
            trim_leading=self.trim_leading,
            trim_trailing=self.trim_trailing,
            min_len=self.min_len,
        )

    @property
    def file_filter(self) -> FileFilter:
        """The file filter of the run."""
        return FileFilter(extensions=frozenset(self.extensions), max_file_bytes=self.max_file_bytes)

    @property
    def resolved_db_path(self) -> Path:
        """The Added Line Database, defaulting to one inside the corpus.

        Raises:
            ValueError: If neither a database nor a corpus has been given.
        """
        if self.db_path is not None:
            return self.db_path
        if self.corpus_root is None:
            raise ValueError("No database path and no corpus to default it from")
        return self.corpus_root / DEFAULT_DB_NAME

    def validate(self) -> list[str]:
        """Check the configuration for values that can't be used.

        Returns:
            A list of human-readable problems, empty when all is well.
        """
        errors: list[str] = []
        if self.k_min < 1:
            errors.append(f"k_min must be at least 1 (got {self.k_min})")
        if self.k_min > self.k_max:
            errors.append(f"k_min must not exceed k_max (got {self.k_min} > {self.k_max})")
        if self.limit < 1:
            errors.append(f"limit must be at least 1 (got {self.limit})")
        if self.jobs < 1:
            errors.append(f"jobs must be at least 1 (got {self.jobs})")
        if self.min_len < 1:
            errors.append(f"min_len must be at least 1 (got {self.min_len})")
        if not [extension for extension in self.extensions if extension.strip(".")]:
            errors.append("extensions must name at least one file extension")
        if self.max_file_bytes <= 0:
            errors.append(f"max_file_bytes must be positive (got {self.max_file_bytes})")
        if self.anchor_threshold < 1:
            errors.append(f"anchor_threshold must be positive (got {self.anchor_threshold})")
        if self.commit_limit is not None and self.commit_limit < 1:
            errors.append(f"commit_limit must be positive (got {self.commit_limit})")
        if self.cohort not in {cohort.value for cohort in Cohort}:
            errors.append(f"cohort must be one of {', '.join(cohort.value for cohort in Cohort)} (got {self.cohort!r})")
        return errors


def run_config_defaults() -> dict[str, Any]:
    """Return the default values of every RunConfig field.

    Returns:
        Mapping from field name to its default value.
    """
    defaults: dict[str, Any] = {}
    for run_field in dataclasses.fields(RunConfig):
        if run_field.default is not dataclasses.MISSING:
            defaults[run_field.name] = run_field.default
        elif run_field.default_factory is not dataclasses.MISSING:
            defaults[run_field.name] = run_field.default_factory()
    return defaults


### run_config.py ends here
