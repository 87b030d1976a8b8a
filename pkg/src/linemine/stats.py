"""Corpus statistics for linemine."""

##############################################################################
# Python imports.
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

##############################################################################
# Local imports.
from linemine.corpus import FileFilter, language_of, load_manifest, load_snapshot


@dataclass
class CorpusStats:
    """A description of a corpus, in the shape of a subject-system table.

    The line and file counts describe the latest revision of the corpus.
    """

    revisions: int = 0
    """Number of revisions in the corpus."""

    first_label: str = ""
    """Label of the oldest revision."""

    last_label: str = ""
    """Label of the newest revision."""

    files: int = 0
    """Number of source files in the latest revision."""

    lines: int = 0
    """Number of lines in the latest revision."""

    lines_per_language: dict[str, int] = field(default_factory=dict)
    """Lines of the latest revision, by language."""

    skipped_files: int = 0
    """Files of the latest revision that couldn't be decoded."""


def compute_corpus_stats(corpus_root: Path, file_filter: FileFilter) -> CorpusStats:
    """Describe a corpus.

    Args:
        corpus_root: The root directory of the corpus.
        file_filter: Decides which files make up a snapshot.

    Returns:
        The statistics; all zero for a corpus with an empty manifest.
    """
    manifest = load_manifest(corpus_root)
    if not manifest:
        return CorpusStats()
    latest = load_snapshot(corpus_root, manifest[-1], file_filter)
    per_language: Counter[str] = Counter()
    for path, lines in latest.files.items():
        per_language[language_of(path)] += len(lines)
    return CorpusStats(
        revisions=len(manifest),
        first_label=manifest[0].label,
        last_label=manifest[-1].label,
        files=len(latest.files),
        lines=latest.line_count,
        lines_per_language=dict(sorted(per_language.items())),
        skipped_files=len(latest.warnings),
    )
