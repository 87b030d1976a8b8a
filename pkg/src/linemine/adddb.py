"""The Added Line Database.

The database is stored as JSON Lines: one object per added line, with the
keys `rev`, `file`, `line` and `text` in that order, UTF-8 encoded, LF
terminated and with no extra whitespace. Writing the same database twice
gives byte-identical files.
"""

##############################################################################
# Python imports.
import json
import logging
from collections import Counter
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

##############################################################################
# Local imports.
from linemine.corpus import FileFilter, RevisionDescriptor, load_snapshot
from linemine.diff import DEFAULT_ANCHOR_THRESHOLD, AddedLine, snapshot_delta

##############################################################################
# The keys of a database record, in the order they are written.
RECORD_KEYS = ("rev", "file", "line", "text")

log = logging.getLogger(__name__)


class DatabaseError(Exception):
    """Base exception for problems with an Added Line Database."""


class DatabaseParseError(DatabaseError):
    """Raised when a line of a database file can't be read."""

    def __init__(self, line_number: int, reason: str) -> None:
        """Initialise the error.

        Args:
            line_number: The 1-based number of the offending line.
            reason: Why the line was rejected.
        """
        super().__init__(f"parse-error: line {line_number}: {reason}")
        self.line_number = line_number


class DatabaseRangeError(DatabaseError):
    """Raised when records fall outside the revisions of a corpus."""


def _record_key(record: AddedLine) -> tuple[int, str, int]:
    """The ordering key of a record."""
    return (record.revision, record.file, record.line_no)


@dataclass
class AddedLineDb:
    """Every added line of a corpus, with the revision it was added in."""

    records: list[AddedLine] = field(default_factory=list)
    """The added lines, ordered by revision, then file, then line number."""

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[AddedLine]:
        return iter(self.records)

    def by_revision(self) -> dict[int, list[AddedLine]]:
        """Group the records by the revision they were added in.

        Returns:
            Revision index mapped to that revision's records, in order.
        """
        grouped: dict[int, list[AddedLine]] = {}
        for record in self.records:
            grouped.setdefault(record.revision, []).append(record)
        return grouped

    def restricted_to(self, revision: int) -> "AddedLineDb":
        """Get the records added up to and including a revision.

        Args:
            revision: The last revision to keep.

        Returns:
            A new database holding only the earlier records.
        """
        return AddedLineDb([record for record in self.records if record.revision <= revision])

    def check_range(self, revision_count: int) -> None:
        """Check that every record belongs to a corpus of a given size.

        Args:
            revision_count: The number of revisions in the corpus.

        Raises:
            DatabaseRangeError: If a record's revision is out of range.
        """
        for record in self.records:
            if not 1 <= record.revision < revision_count:
                raise DatabaseRangeError(
                    f"revision-pair-mismatch: record {record.file}:{record.line_no} is for revision "
                    f"{record.revision}, but the corpus has revisions 0..{revision_count - 1}"
                )


@dataclass(frozen=True)
class DbStats:
    """Counts of added lines per revision."""

    per_revision: dict[int, int]
    """Revision index mapped to the number of lines added in it."""

    total: int
    """The number of added lines overall."""


def encode_record(record: AddedLine) -> str:
    """Encode one record as a line of the database file.

    Args:
        record: The record to encode.

    Returns:
        The JSON text, without a line terminator.

    Examples:
        >>> encode_record(AddedLine(3, "a.c", 2, "y;"))
        '{"rev":3,"file":"a.c","line":2,"text":"y;"}'
    """
    return json.dumps(
        {"rev": record.revision, "file": record.file, "line": record.line_no, "text": record.text},
        ensure_ascii=False,
        separators=(",", ":"),
    )


def decode_record(line: str, line_number: int) -> AddedLine:
    """Decode one line of the database file.

    Args:
        line: The JSON text of the line.
        line_number: The 1-based line number, for error reporting.

    Returns:
        The decoded record.

    Raises:
        DatabaseParseError: If the line isn't a valid record.
    """
    try:
        data = json.loads(line)
    except json.JSONDecodeError as e:
        raise DatabaseParseError(line_number, f"not JSON ({e.msg})") from None
    if not isinstance(data, dict) or set(data) != set(RECORD_KEYS):
        raise DatabaseParseError(line_number, f"expected an object with keys {', '.join(RECORD_KEYS)}")
    rev, file, line_no, text = (data[key] for key in RECORD_KEYS)
    if not (isinstance(rev, int) and not isinstance(rev, bool) and rev >= 1):
        raise DatabaseParseError(line_number, f"bad revision {rev!r}")
    if not (isinstance(line_no, int) and not isinstance(line_no, bool) and line_no >= 1):
        raise DatabaseParseError(line_number, f"bad line number {line_no!r}")
    if not isinstance(file, str) or not file:
        raise DatabaseParseError(line_number, f"bad file {file!r}")
    if not isinstance(text, str) or "\n" in text:
        raise DatabaseParseError(line_number, "bad text")
    return AddedLine(revision=rev, file=file, line_no=line_no, text=text)


def write_db(db: AddedLineDb, path: Path) -> None:
    """Write a database to a file.

    Args:
        db: The database to write.
        path: The file to write; its directory must exist.

    Raises:
        OSError: If the file can't be written.
    """
    with path.open("w", encoding="utf-8", newline="\n") as output:
        for record in db.records:
            output.write(encode_record(record))
            output.write("\n")


def read_db(path: Path) -> AddedLineDb:
    """Read a database from a file.

    Records found out of order are put back in order, with a warning.

    Args:
        path: The file to read.

    Returns:
        The database.

    Raises:
        DatabaseParseError: If a line isn't a valid record.
        OSError: If the file can't be read.
    """
    raw = path.read_bytes()
    try:
        content = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DatabaseParseError(raw[: e.start].count(b"\n") + 1, "not valid UTF-8") from None
    records: list[AddedLine] = []
    # Only LF ends a record; the text of a line may hold other separators.
    for line_number, line in enumerate(content.split("\n"), start=1):
        if not line:
            continue
        records.append(decode_record(line, line_number))
    if any(_record_key(a) > _record_key(b) for a, b in zip(records, records[1:], strict=False)):
        log.warning("%s: records are out of order; re-ordering them", path)
        records.sort(key=_record_key)
    return AddedLineDb(records)


def db_stats(db: AddedLineDb) -> DbStats:
    """Count the added lines of each revision.

    Args:
        db: The database to summarise.

    Returns:
        The per-revision counts and the total.
    """
    counts = Counter(record.revision for record in db.records)
    return DbStats(per_revision=dict(sorted(counts.items())), total=len(db.records))


def _pair_delta(
    corpus_root: Path,
    prev: RevisionDescriptor,
    next: RevisionDescriptor,
    file_filter: FileFilter,
    anchor_threshold: int,
) -> list[AddedLine]:
    """Load two consecutive snapshots and find the lines added between them."""
    return snapshot_delta(
        load_snapshot(corpus_root, prev, file_filter),
        load_snapshot(corpus_root, next, file_filter),
        anchor_threshold,
    )


def build_db(
    corpus_root: Path,
    manifest: Sequence[RevisionDescriptor],
    file_filter: FileFilter,
    jobs: int = 1,
    anchor_threshold: int = DEFAULT_ANCHOR_THRESHOLD,
) -> AddedLineDb:
    """Build the Added Line Database of a corpus.

    Every consecutive pair of revisions is compared. With more than one
    job the pairs are compared in worker processes; the result doesn't
    depend on the number of jobs.

    Args:
        corpus_root: The root directory of the corpus.
        manifest: The revisions of the corpus.
        file_filter: Decides which files make up a snapshot.
        jobs: The number of worker processes to use.
        anchor_threshold: Region size above which the diff anchors on
            unique lines.

    Returns:
        The database.
    """
    pairs = list(zip(manifest, manifest[1:], strict=False))
    records: list[AddedLine] = []
    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_pair_delta, corpus_root, prev, next, file_filter, anchor_threshold)
                for prev, next in pairs
            ]
            for future in futures:
                records.extend(future.result())
    else:
        previous = load_snapshot(corpus_root, manifest[0], file_filter) if manifest else None
        for _, next in pairs:
            assert previous is not None
            current = load_snapshot(corpus_root, next, file_filter)
            records.extend(snapshot_delta(previous, current, anchor_threshold))
            previous = current
    records.sort(key=_record_key)
    return AddedLineDb(records)
