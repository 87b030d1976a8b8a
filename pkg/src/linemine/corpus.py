"""The on-disk corpus of ordered revision snapshots.

A corpus is a directory holding a `manifest.tsv` file plus one full source
tree per revision:

    corpus/
        manifest.tsv        index<TAB>label, one revision per line
        r0000/              tree of revision 0
        r0001/              tree of revision 1
        ...

Snapshot directory names are zero-padded to four digits so that their
lexicographic order matches their numeric order.
"""

##############################################################################
# Python imports.
import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

##############################################################################
# Name of the manifest file at the root of a corpus.
MANIFEST_NAME = "manifest.tsv"

##############################################################################
# Default set of file extensions that make up a snapshot (C and Java).
DEFAULT_EXTENSIONS: frozenset[str] = frozenset({".c", ".h", ".java"})

##############################################################################
# Default size limit for a single source file.
DEFAULT_MAX_FILE_BYTES = 2 * 1024 * 1024

##############################################################################
# Languages of the file extensions linemine knows by name.
LANGUAGES: dict[str, str] = {".c": "C", ".h": "C", ".java": "Java"}

log = logging.getLogger(__name__)


class CorpusError(Exception):
    """Base exception for problems with a corpus."""


class CorpusNotFoundError(CorpusError):
    """Raised when a corpus has no manifest."""


class MalformedManifestError(CorpusError):
    """Raised when a manifest line can't be accepted."""

    def __init__(self, line_number: int, reason: str) -> None:
        """Initialise the error.

        Args:
            line_number: The 1-based number of the offending manifest line.
            reason: Why the line was rejected.
        """
        super().__init__(f"malformed-manifest: line {line_number}: {reason}")
        self.line_number = line_number


class SnapshotNotFoundError(CorpusError):
    """Raised when the directory for a revision is missing."""


@dataclass(frozen=True)
class RevisionDescriptor:
    """The identity of one revision in a corpus."""

    index: int
    """The 0-based, contiguous position of the revision in the corpus."""

    label: str
    """Free-text label for the revision (a commit hash, a revision number)."""


@dataclass(frozen=True)
class FileFilter:
    """Decides which files take part in a snapshot."""

    extensions: frozenset[str] = DEFAULT_EXTENSIONS
    """Lowercase file suffixes (including the leading dot) to accept."""

    max_file_bytes: int = DEFAULT_MAX_FILE_BYTES
    """Files larger than this many bytes are left out."""

    def __post_init__(self) -> None:
        """Normalise and validate the filter.

        Raises:
            ValueError: If the filter can never accept a file.
        """
        normalised = frozenset(
            (ext if ext.startswith(".") else f".{ext}").lower()
            for ext in self.extensions
            if ext.strip(".")
        )
        if not normalised:
            raise ValueError("File filter needs at least one extension")
        if self.max_file_bytes <= 0:
            raise ValueError("File filter byte limit must be positive")
        object.__setattr__(self, "extensions", normalised)

    def accepts_name(self, name: str) -> bool:
        """Does the filter accept a file with the given name?

        Args:
            name: The file name or relative path.

        Returns:
            `True` if the name carries one of the accepted extensions.
        """
        dot = name.rfind(".")
        slash = name.rfind("/")
        if dot <= slash + 1:
            return False
        return name[dot:].lower() in self.extensions

    def accepts(self, name: str, size: int) -> bool:
        """Does the filter accept a file with the given name and size?

        Args:
            name: The file name or relative path.
            size: The size of the file in bytes.

        Returns:
            `True` if the file should be part of a snapshot.
        """
        return size <= self.max_file_bytes and self.accepts_name(name)

    def describe(self) -> str:
        """Describe the filter for a report header.

        Returns:
            A short, stable description of the filter.
        """
        return f"{','.join(sorted(self.extensions))} (max {self.max_file_bytes} bytes)"


@dataclass(frozen=True)
class Snapshot:
    """One revision's full source tree, as lines of text per file."""

    revision: RevisionDescriptor
    """The revision the snapshot belongs to."""

    files: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    """Relative, forward-slashed file path mapped to the file's lines."""

    warnings: tuple[str, ...] = ()
    """Files that were skipped while loading, with the reason."""

    @property
    def line_count(self) -> int:
        """The total number of lines across all files."""
        return sum(len(lines) for lines in self.files.values())


def language_of(path: str) -> str:
    """Get the language of a source file from its extension.

    Args:
        path: The file name or relative path.

    Returns:
        The language name, or the lowercase extension for an unknown
        language (`"none"` when there isn't one).

    Examples:
        >>> language_of("src/main.c")
        'C'
        >>> language_of("Main.java")
        'Java'
    """
    name = path.rsplit("/", 1)[-1]
    dot = name.rfind(".")
    if dot <= 0:
        return "none"
    extension = name[dot:].lower()
    return LANGUAGES.get(extension, extension)


def snapshot_dir_name(index: int) -> str:
    """Get the directory name used for a revision.

    Args:
        index: The revision index.

    Returns:
        The zero-padded directory name.

    Examples:
        >>> snapshot_dir_name(7)
        'r0007'
    """
    return f"r{index:04d}"


def split_lines(text: str) -> tuple[str, ...]:
    """Split file content into lines.

    Lines are split on LF only; a single trailing CR is stripped from each
    line, and a final line without a terminator is kept.

    Args:
        text: The decoded content of a file.

    Returns:
        The lines of the file, without terminators.

    Examples:
        >>> split_lines("x;\\r\\ny;")
        ('x;', 'y;')
    """
    if not text:
        return ()
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return tuple(line[:-1] if line.endswith("\r") else line for line in lines)


def load_manifest(corpus_root: Path) -> list[RevisionDescriptor]:
    """Load the revision manifest of a corpus.

    Args:
        corpus_root: The root directory of the corpus.

    Returns:
        The revisions of the corpus, ordered by index.

    Raises:
        CorpusNotFoundError: If the corpus has no manifest.
        MalformedManifestError: If a line is malformed, out of sequence, or
            repeats a label.
    """
    manifest = corpus_root / MANIFEST_NAME
    if not manifest.is_file():
        raise CorpusNotFoundError(f"corpus-not-found: no {MANIFEST_NAME} in {corpus_root}")

    revisions: list[RevisionDescriptor] = []
    labels: set[str] = set()
    content = manifest.read_text(encoding="utf-8")
    for line_number, line in enumerate(content.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        index_text, tab, label = line.partition("\t")
        if not tab:
            raise MalformedManifestError(line_number, "expected <index><TAB><label>")
        try:
            index = int(index_text)
        except ValueError:
            raise MalformedManifestError(line_number, f"bad index {index_text!r}") from None
        if index != len(revisions):
            reason = "duplicate index" if index < len(revisions) else "gap in indices"
            raise MalformedManifestError(line_number, f"{reason} (expected {len(revisions)}, got {index})")
        if not label:
            raise MalformedManifestError(line_number, "empty label")
        if label in labels:
            raise MalformedManifestError(line_number, f"duplicate label {label!r}")
        labels.add(label)
        revisions.append(RevisionDescriptor(index=index, label=label))
    return revisions


def write_manifest(corpus_root: Path, revisions: Iterable[RevisionDescriptor]) -> None:
    """Write the manifest of a corpus.

    Args:
        corpus_root: The root directory of the corpus.
        revisions: The revisions, in index order.
    """
    (corpus_root / MANIFEST_NAME).write_bytes(
        "".join(f"{revision.index}\t{revision.label}\n" for revision in revisions).encode("utf-8")
    )


def load_snapshot(corpus_root: Path, desc: RevisionDescriptor, file_filter: FileFilter) -> Snapshot:
    """Load the source tree of one revision.

    Files that can't be decoded as UTF-8 are skipped; each is recorded in
    the snapshot's warnings and logged.

    Args:
        corpus_root: The root directory of the corpus.
        desc: The revision to load.
        file_filter: Decides which files are loaded.

    Returns:
        The loaded snapshot.

    Raises:
        SnapshotNotFoundError: If the revision's directory doesn't exist.
    """
    root = corpus_root / snapshot_dir_name(desc.index)
    if not root.is_dir():
        raise SnapshotNotFoundError(f"snapshot-not-found: {root}")

    files: dict[str, tuple[str, ...]] = {}
    warnings: list[str] = []
    for path in sorted(root.rglob("*")):
        if not path.is_file() or path.is_symlink():
            continue
        relative = path.relative_to(root).as_posix()
        if not file_filter.accepts(relative, path.stat().st_size):
            continue
        try:
            text = path.read_bytes().decode("utf-8")
        except UnicodeDecodeError:
            warnings.append(f"{snapshot_dir_name(desc.index)}/{relative}: not valid UTF-8, skipped")
            log.warning(warnings[-1])
            continue
        files[relative] = split_lines(text)
    return Snapshot(revision=desc, files=dict(sorted(files.items())), warnings=tuple(warnings))
