"""The line completion engine.

The searchable codebase is one snapshot: its distinct normalized lines,
kept in a sorted array so that every line starting with a given prefix
sits in one contiguous range found by binary search. Completions in
that range are ranked by recency, the most recent revision in which the
line's text was added anywhere in the history.
"""

##############################################################################
# Python imports.
import heapq
from bisect import bisect_left
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

##############################################################################
# Local imports.
from linemine.adddb import AddedLineDb
from linemine.corpus import FileFilter, RevisionDescriptor, Snapshot, SnapshotNotFoundError, load_snapshot
from linemine.diff import AddedLine

##############################################################################
# The largest code point; no character sorts after it.
_MAX_CODE_POINT = 0x10FFFF


class InvalidPrefixError(ValueError):
    """Raised when a completion is asked for with an empty prefix."""


@dataclass(frozen=True)
class NormalizationPolicy:
    """How raw lines are turned into searchable text."""

    trim_leading: bool = True
    """Remove leading whitespace."""

    trim_trailing: bool = True
    """Remove trailing whitespace."""

    min_len: int = 1
    """Lines shorter than this after trimming are not indexed."""

    def __post_init__(self) -> None:
        """Validate the policy.

        Raises:
            ValueError: If the minimum length is less than one.
        """
        if self.min_len < 1:
            raise ValueError("The minimum indexable line length must be at least 1")

    def describe(self) -> str:
        """Describe the policy for a report header.

        Returns:
            A short, stable description of the policy.
        """
        trims = [name for name, on in (("leading", self.trim_leading), ("trailing", self.trim_trailing)) if on]
        return f"trim={'+'.join(trims) or 'none'} min_len={self.min_len}"


def normalize(raw: str, policy: NormalizationPolicy) -> str | None:
    """Normalize a raw line for matching.

    Args:
        raw: The raw line, without its terminator.
        policy: The normalization policy.

    Returns:
        The normalized line, or `None` if it is too short to index.

    Examples:
        >>> normalize("  int x;  ", NormalizationPolicy())
        'int x;'
        >>> normalize("   ", NormalizationPolicy()) is None
        True
    """
    text = raw
    if policy.trim_leading:
        text = text.lstrip()
    if policy.trim_trailing:
        text = text.rstrip()
    return text if len(text) >= policy.min_len else None


@dataclass
class RecencyMap:
    """The last revision in which each normalized line was added."""

    revisions: dict[str, int] = field(default_factory=dict)
    """Normalized text mapped to its last revision of addition.

    Lines present since the first snapshot, and never added since, map
    to 0.
    """

    def get(self, text: str) -> int:
        """Get the recency of a normalized line.

        Args:
            text: The normalized line.

        Returns:
            The last revision the line was added in; 0 when unknown.
        """
        return self.revisions.get(text, 0)

    def __len__(self) -> int:
        return len(self.revisions)

    def __contains__(self, text: object) -> bool:
        return text in self.revisions

    def seed(self, base: Snapshot, policy: NormalizationPolicy) -> None:
        """Record every line of the first snapshot with recency 0.

        Args:
            base: The snapshot of revision 0.
            policy: The normalization policy.
        """
        for lines in base.files.values():
            for raw in lines:
                if (text := normalize(raw, policy)) is not None:
                    self.revisions.setdefault(text, 0)

    def advance(self, added: Iterable[AddedLine], policy: NormalizationPolicy) -> None:
        """Take the lines added in later revisions into account.

        Args:
            added: The added lines.
            policy: The normalization policy.
        """
        for line in added:
            if (text := normalize(line.text, policy)) is not None:
                self.revisions[text] = max(self.revisions.get(text, 0), line.revision)


def build_recency(
    db: AddedLineDb,
    base: Snapshot,
    policy: NormalizationPolicy,
    through: int | None = None,
) -> RecencyMap:
    """Build the recency map of a history.

    Args:
        db: The Added Line Database.
        base: The snapshot of revision 0.
        policy: The normalization policy.
        through: Ignore additions after this revision; `None` uses them all.

    Returns:
        The recency map.
    """
    recency = RecencyMap()
    recency.seed(base, policy)
    recency.advance(db if through is None else db.restricted_to(through), policy)
    return recency


@dataclass(frozen=True)
class IndexEntry:
    """One distinct normalized line of an indexed snapshot."""

    norm_text: str
    """The normalized line."""

    recency: int
    """The last revision in which the line was added."""

    file: str
    """File of the line's first occurrence (smallest path, then line)."""

    line_no: int
    """1-based line number of the line's first occurrence."""


@dataclass(frozen=True)
class Suggestion:
    """A ranked completion."""

    text: str
    """The suggested (normalized) line."""

    recency: int
    """The last revision in which the line was added."""

    file: str
    """Where the line can be found."""

    line_no: int
    """1-based line number of the line in `file`."""

    rank: int
    """1-based position of the suggestion in its result list."""


def _prefix_successor(prefix: str) -> str | None:
    """Find the smallest string greater than every string starting with `prefix`.

    Returns:
        The successor, or `None` if there is none.
    """
    stem = prefix.rstrip(chr(_MAX_CODE_POINT))
    if not stem:
        return None
    return stem[:-1] + chr(ord(stem[-1]) + 1)


@dataclass(frozen=True)
class PrefixIndex:
    """The distinct normalized lines of a snapshot, sorted by code point."""

    revision: int
    """The revision of the indexed snapshot."""

    entries: tuple[IndexEntry, ...] = ()
    """The entries, strictly increasing by `norm_text`."""

    texts: tuple[str, ...] = field(init=False, repr=False, compare=False)
    """The `norm_text` of each entry, for searching."""

    def __post_init__(self) -> None:
        object.__setattr__(self, "texts", tuple(entry.norm_text for entry in self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, text: object) -> bool:
        if not isinstance(text, str):
            return False
        position = bisect_left(self.texts, text)
        return position < len(self.texts) and self.texts[position] == text

    def prefix_range(self, prefix: str) -> tuple[int, int]:
        """Find the entries starting with a prefix.

        Args:
            prefix: The prefix to look for.

        Returns:
            The `(start, end)` slice of `entries` holding the matches.
        """
        start = bisect_left(self.texts, prefix)
        successor = _prefix_successor(prefix)
        end = len(self.texts) if successor is None else bisect_left(self.texts, successor, start)
        return start, end

    def matching_texts(self, prefix: str) -> Sequence[str]:
        """Get the texts of the entries starting with a prefix, unranked.

        Args:
            prefix: The prefix to look for.

        Returns:
            The matching texts, in index order.
        """
        start, end = self.prefix_range(prefix)
        return self.texts[start:end]


def build_index(snapshot: Snapshot, recency: RecencyMap, policy: NormalizationPolicy) -> PrefixIndex:
    """Index the distinct normalized lines of a snapshot.

    Args:
        snapshot: The snapshot to index.
        recency: The recency map, covering revisions up to the snapshot's.
        policy: The normalization policy.

    Returns:
        The prefix index.
    """
    first_seen: dict[str, tuple[str, int]] = {}
    for path in sorted(snapshot.files):
        for line_no, raw in enumerate(snapshot.files[path], start=1):
            if (text := normalize(raw, policy)) is not None and text not in first_seen:
                first_seen[text] = (path, line_no)
    return PrefixIndex(
        revision=snapshot.revision.index,
        entries=tuple(
            IndexEntry(norm_text=text, recency=recency.get(text), file=path, line_no=line_no)
            for text, (path, line_no) in sorted(first_seen.items())
        ),
    )


def _ranking_key(entry: IndexEntry) -> tuple[int, str, int, str]:
    """The ranking order: most recent first, then by location."""
    return (-entry.recency, entry.file, entry.line_no, entry.norm_text)


def query_prefix(index: PrefixIndex, prefix: str, limit: int | None = None) -> list[Suggestion]:
    """Find the ranked completions of a prefix.

    Args:
        index: The index to search.
        prefix: The characters typed so far.
        limit: The most suggestions to return; `None` for no limit.

    Returns:
        The suggestions, most recent first.

    Raises:
        InvalidPrefixError: If the prefix is empty.
    """
    if not prefix:
        raise InvalidPrefixError("invalid-prefix: the prefix must not be empty")
    start, end = index.prefix_range(prefix)
    matches = index.entries[start:end]
    if limit is None:
        ranked = sorted(matches, key=_ranking_key)
    else:
        ranked = heapq.nsmallest(max(limit, 0), matches, key=_ranking_key)
    return [
        Suggestion(text=entry.norm_text, recency=entry.recency, file=entry.file, line_no=entry.line_no, rank=rank)
        for rank, entry in enumerate(ranked, start=1)
    ]


def target_prefix(candidate_norm: str, k: int) -> str | None:
    """Take the first `k` characters of a line as the text typed so far.

    There has to be something left to complete, so lines of `k`
    characters or fewer are too short.

    Args:
        candidate_norm: The normalized line being completed.
        k: The number of characters typed.

    Returns:
        The prefix, or `None` if the line is too short.

    Raises:
        ValueError: If `k` is less than one.

    Examples:
        >>> target_prefix("int count = 0;", 5)
        'int c'
        >>> target_prefix("int x;", 6) is None
        True
    """
    if k < 1:
        raise ValueError("The prefix length must be at least 1")
    return candidate_norm[:k] if len(candidate_norm) >= k + 1 else None


def build_revision_index(
    corpus_root: Path,
    manifest: Sequence[RevisionDescriptor],
    db: AddedLineDb,
    revision: int,
    policy: NormalizationPolicy,
    file_filter: FileFilter,
) -> PrefixIndex:
    """Index one revision of a corpus, ranked by the history up to it.

    Args:
        corpus_root: The root directory of the corpus.
        manifest: The revisions of the corpus.
        db: The Added Line Database of the corpus.
        revision: The revision to index.
        policy: The normalization policy.
        file_filter: Decides which files make up a snapshot.

    Returns:
        The prefix index of the revision.

    Raises:
        SnapshotNotFoundError: If the revision isn't in the corpus.
    """
    if not 0 <= revision < len(manifest):
        raise SnapshotNotFoundError(f"snapshot-not-found: revision {revision} is not in the corpus")
    base = load_snapshot(corpus_root, manifest[0], file_filter)
    snapshot = base if revision == 0 else load_snapshot(corpus_root, manifest[revision], file_filter)
    return build_index(snapshot, build_recency(db, base, policy, through=revision), policy)
