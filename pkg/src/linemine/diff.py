"""Line-level differences between two versions of a file.

The edit script is minimal in the number of inserted plus deleted lines
(longest common subsequence semantics), computed with Myers' greedy
O(ND) algorithm. Regions too far apart for that search are anchored on
lines unique to both sides, and `difflib` matches whatever still can't
be anchored; `EditScript.strategy` says which ran. Hunks follow the
classic UNIX `diff` taxonomy: a run of edits between two unchanged lines
is an *insert* (`a`), a *delete* (`d`) or, when it both removes and adds
lines, a *change* (`c`).

Only pure insertions count as added lines; changed and deleted lines are
never reported.
"""

##############################################################################
# Python imports.
import logging
from bisect import bisect_left
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from difflib import SequenceMatcher
from enum import StrEnum

##############################################################################
# Local imports.
from linemine.corpus import Snapshot

##############################################################################
# When both sides of a region still hold more than this many lines after
# trimming their common head and tail, lines unique to both sides are used
# as anchors before the minimal algorithm runs on the gaps between them.
DEFAULT_ANCHOR_THRESHOLD = 50_000

##############################################################################
# The most edits the minimal algorithm searches for in one region. Its
# memory grows with the square of this; past it, the region is anchored
# on unique lines instead.
DEFAULT_MAX_EDITS = 1_000

log = logging.getLogger(__name__)


class RevisionPairMismatchError(ValueError):
    """Raised when two revisions that should be consecutive are not."""


class HunkKind(StrEnum):
    """The kind of a hunk."""

    INSERT = "insert"
    DELETE = "delete"
    CHANGE = "change"


class DiffStrategy(StrEnum):
    """How an edit script was computed."""

    MINIMAL = "minimal"
    """Myers' algorithm over the whole region; the script is minimal."""

    ANCHORED = "anchored"
    """Unique-line anchoring first, Myers between anchors."""

    HEURISTIC = "heuristic"
    """Some region was too far apart to search and had no anchors; `difflib` matched it."""


_STRATEGY_ORDER = (DiffStrategy.MINIMAL, DiffStrategy.ANCHORED, DiffStrategy.HEURISTIC)


def _weakest(*strategies: DiffStrategy) -> DiffStrategy:
    """The least exact of some strategies."""
    return max(strategies, key=_STRATEGY_ORDER.index)


@dataclass(frozen=True)
class Hunk:
    """One contiguous edit region of an edit script."""

    kind: HunkKind
    """Whether the hunk inserts, deletes or changes lines."""

    old_start: int
    """0-based position of the hunk in the old sequence."""

    old_lines: tuple[str, ...]
    """The lines the hunk removes."""

    new_start: int
    """0-based position of the hunk in the new sequence."""

    new_lines: tuple[str, ...]
    """The lines the hunk inserts."""


@dataclass(frozen=True)
class EditScript:
    """The hunks turning one sequence into another."""

    hunks: tuple[Hunk, ...]
    """The hunks, ordered by position."""

    strategy: DiffStrategy
    """Which algorithm produced the hunks."""


@dataclass(frozen=True)
class AddedLine:
    """A line newly inserted in a revision, relative to the one before it."""

    revision: int
    """Index of the newer revision."""

    file: str
    """Relative path of the file the line was added to."""

    line_no: int
    """1-based line number in the newer file."""

    text: str
    """The raw text of the line."""


def _intern(old: Sequence[str], new: Sequence[str]) -> tuple[list[int], list[int]]:
    """Map lines to small integers so comparisons are cheap."""
    ids: dict[str, int] = {}
    return (
        [ids.setdefault(line, len(ids)) for line in old],
        [ids.setdefault(line, len(ids)) for line in new],
    )


def _myers(a: Sequence[int], b: Sequence[int], max_edits: int) -> list[tuple[int, int]] | None:
    """Find a longest common subsequence with Myers' greedy algorithm.

    Diagonals are extended as far as possible from the front, so matches
    are taken as early as they can be and edits land as late as they can.

    Args:
        a: The old sequence.
        b: The new sequence.
        max_edits: Give up once a script would need more edits than this.

    Returns:
        Matched `(old, new)` index pairs, in increasing order, or `None`
        if the sequences are further apart than `max_edits`.
    """
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    if abs(n - m) > max_edits:
        return None
    max_d = min(n + m, max_edits)
    offset = max_d + 1
    v = [0] * (2 * max_d + 3)
    trace: list[list[int]] = []
    done = False
    for d in range(max_d + 1):
        for k in range(-d, d + 1, 2):
            if k == -d or (k != d and v[offset + k - 1] < v[offset + k + 1]):
                x = v[offset + k + 1]
            else:
                x = v[offset + k - 1] + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            v[offset + k] = x
            if x >= n and y >= m:
                done = True
                break
        # trace[d][k + d] is the furthest x reached on diagonal k with d edits.
        trace.append(v[offset - d : offset + d + 1])
        if done:
            break
    if not done:
        return None

    matches: list[tuple[int, int]] = []
    x, y = n, m
    for d in range(len(trace) - 1, 0, -1):
        previous = trace[d - 1]
        k = x - y
        if k == -d or (k != d and previous[k - 1 + d - 1] < previous[k + 1 + d - 1]):
            previous_k = k + 1
            previous_x = previous[previous_k + d - 1]
            start_x = previous_x
        else:
            previous_k = k - 1
            previous_x = previous[previous_k + d - 1]
            start_x = previous_x + 1
        while x > start_x:
            x -= 1
            y -= 1
            matches.append((x, y))
        x, y = previous_x, previous_x - previous_k
    while x > 0 and y > 0:
        x -= 1
        y -= 1
        matches.append((x, y))
    matches.reverse()
    return matches


def _unique_anchors(
    a: Sequence[int], a_lo: int, a_hi: int, b: Sequence[int], b_lo: int, b_hi: int
) -> list[tuple[int, int]]:
    """Find anchor pairs: lines occurring exactly once on each side.

    The anchors returned are the longest run of such pairs that is
    increasing on both sides (patience sorting).

    Returns:
        Anchor `(old, new)` index pairs, in increasing order.
    """
    old_counts = Counter(a[a_lo:a_hi])
    new_counts = Counter(b[b_lo:b_hi])
    new_position = {b[j]: j for j in range(b_lo, b_hi) if new_counts[b[j]] == 1}
    candidates = [
        (i, new_position[a[i]]) for i in range(a_lo, a_hi) if old_counts[a[i]] == 1 and a[i] in new_position
    ]
    if not candidates:
        return []

    # Longest increasing subsequence of the new-side positions.
    tails: list[int] = []
    tail_index: list[int] = []
    back: list[int] = []
    for position, (_, j) in enumerate(candidates):
        pile = bisect_left(tails, j)
        back.append(tail_index[pile - 1] if pile else -1)
        if pile == len(tails):
            tails.append(j)
            tail_index.append(position)
        else:
            tails[pile] = j
            tail_index[pile] = position
    anchors: list[tuple[int, int]] = []
    cursor = tail_index[-1]
    while cursor != -1:
        anchors.append(candidates[cursor])
        cursor = back[cursor]
    anchors.reverse()
    return anchors


def _match_region(
    a: Sequence[int],
    a_lo: int,
    a_hi: int,
    b: Sequence[int],
    b_lo: int,
    b_hi: int,
    anchor_threshold: int,
    max_edits: int,
    matches: list[tuple[int, int]],
) -> DiffStrategy:
    """Collect the matched lines of a region of the two sequences.

    Args:
        a: The old sequence.
        a_lo: Start of the old region.
        a_hi: End (exclusive) of the old region.
        b: The new sequence.
        b_lo: Start of the new region.
        b_hi: End (exclusive) of the new region.
        anchor_threshold: Size above which anchoring is used.
        max_edits: The most edits the minimal algorithm searches for.
        matches: The list matched pairs are appended to, in order.

    Returns:
        The least exact strategy used anywhere within the region.
    """
    while a_lo < a_hi and b_lo < b_hi and a[a_lo] == b[b_lo]:
        matches.append((a_lo, b_lo))
        a_lo += 1
        b_lo += 1
    tail: list[tuple[int, int]] = []
    while a_lo < a_hi and b_lo < b_hi and a[a_hi - 1] == b[b_hi - 1]:
        a_hi -= 1
        b_hi -= 1
        tail.append((a_hi, b_hi))

    found = None
    if a_hi - a_lo <= anchor_threshold or b_hi - b_lo <= anchor_threshold:
        found = _myers(a[a_lo:a_hi], b[b_lo:b_hi], max_edits)
    if found is not None:
        strategy = DiffStrategy.MINIMAL
        matches.extend((i + a_lo, j + b_lo) for i, j in found)
    elif anchors := _unique_anchors(a, a_lo, a_hi, b, b_lo, b_hi):
        strategy = DiffStrategy.ANCHORED
        for i, j in anchors:
            strategy = _weakest(
                strategy, _match_region(a, a_lo, i, b, b_lo, j, anchor_threshold, max_edits, matches)
            )
            matches.append((i, j))
            a_lo, b_lo = i + 1, j + 1
        strategy = _weakest(
            strategy, _match_region(a, a_lo, a_hi, b, b_lo, b_hi, anchor_threshold, max_edits, matches)
        )
    elif a_hi - a_lo > anchor_threshold and b_hi - b_lo > anchor_threshold:
        # Large but searchable once the threshold is set aside.
        return _match_region(a, a_lo, a_hi, b, b_lo, b_hi, max(a_hi - a_lo, b_hi - b_lo), max_edits, matches)
    else:
        strategy = DiffStrategy.HEURISTIC
        matcher = SequenceMatcher(None, a[a_lo:a_hi], b[b_lo:b_hi])
        for block in matcher.get_matching_blocks():
            matches.extend((a_lo + block.a + step, b_lo + block.b + step) for step in range(block.size))
    matches.extend(reversed(tail))
    return strategy


def _hunks_from_matches(
    old_lines: Sequence[str], new_lines: Sequence[str], matches: Sequence[tuple[int, int]]
) -> tuple[Hunk, ...]:
    """Turn the gaps between matched lines into hunks."""
    hunks: list[Hunk] = []
    old_at = new_at = 0
    for i, j in [*matches, (len(old_lines), len(new_lines))]:
        if i > old_at or j > new_at:
            removed = tuple(old_lines[old_at:i])
            inserted = tuple(new_lines[new_at:j])
            if removed and inserted:
                kind = HunkKind.CHANGE
            elif inserted:
                kind = HunkKind.INSERT
            else:
                kind = HunkKind.DELETE
            hunks.append(Hunk(kind, old_at, removed, new_at, inserted))
        old_at, new_at = i + 1, j + 1
    return tuple(hunks)


def diff_lines(
    old_lines: Sequence[str],
    new_lines: Sequence[str],
    anchor_threshold: int = DEFAULT_ANCHOR_THRESHOLD,
    max_edits: int = DEFAULT_MAX_EDITS,
) -> EditScript:
    """Compute the edit script between two versions of a file.

    Args:
        old_lines: The lines of the old version.
        new_lines: The lines of the new version.
        anchor_threshold: Region size above which unique-line anchoring
            is used before the minimal algorithm.
        max_edits: The most edits the minimal algorithm searches for in
            a region before anchoring is used instead.

    Returns:
        The edit script, along with the strategy that produced it.
    """
    a, b = _intern(old_lines, new_lines)
    matches: list[tuple[int, int]] = []
    strategy = _match_region(a, 0, len(a), b, 0, len(b), anchor_threshold, max_edits, matches)
    return EditScript(hunks=_hunks_from_matches(old_lines, new_lines, matches), strategy=strategy)


def line_diff(old_lines: Sequence[str], new_lines: Sequence[str]) -> list[Hunk]:
    """Compute the minimal hunks turning one list of lines into another.

    Args:
        old_lines: The lines of the old version.
        new_lines: The lines of the new version.

    Returns:
        The hunks, ordered by position.
    """
    return list(diff_lines(old_lines, new_lines).hunks)


def apply_hunks(old_lines: Sequence[str], hunks: Sequence[Hunk]) -> list[str]:
    """Replay hunks over the old version of a file.

    Args:
        old_lines: The lines of the old version.
        hunks: The hunks to apply, ordered by position.

    Returns:
        The lines of the new version.
    """
    result: list[str] = []
    cursor = 0
    for hunk in hunks:
        result.extend(old_lines[cursor : hunk.old_start])
        result.extend(hunk.new_lines)
        cursor = hunk.old_start + len(hunk.old_lines)
    result.extend(old_lines[cursor:])
    return result


def added_from_hunks(hunks: Sequence[Hunk]) -> list[tuple[int, str]]:
    """Pull the purely added lines out of a list of hunks.

    Args:
        hunks: The hunks of an edit script.

    Returns:
        `(line_no, text)` pairs, where `line_no` is the 1-based line number
        in the new file. Changed and deleted lines never appear.
    """
    return [
        (hunk.new_start + offset + 1, text)
        for hunk in hunks
        if hunk.kind is HunkKind.INSERT
        for offset, text in enumerate(hunk.new_lines)
    ]


def snapshot_delta(
    prev: Snapshot,
    next: Snapshot,
    anchor_threshold: int = DEFAULT_ANCHOR_THRESHOLD,
) -> list[AddedLine]:
    """Find the lines added between two consecutive snapshots.

    Every line of a file that only exists in the newer snapshot counts as
    added; files that only exist in the older snapshot are ignored.

    Args:
        prev: The older snapshot.
        next: The newer snapshot.
        anchor_threshold: Region size above which unique-line anchoring
            is used before the minimal algorithm.

    Returns:
        The added lines, ordered by file then line number.

    Raises:
        RevisionPairMismatchError: If the snapshots aren't consecutive.
    """
    if prev.revision.index + 1 != next.revision.index:
        raise RevisionPairMismatchError(
            f"revision-pair-mismatch: {prev.revision.index} is not directly followed by {next.revision.index}"
        )
    revision = next.revision.index
    added: list[AddedLine] = []
    for path in sorted(next.files):
        new_lines = next.files[path]
        old_lines = prev.files.get(path)
        if old_lines is None:
            pairs = [(line_no, text) for line_no, text in enumerate(new_lines, start=1)]
        else:
            script = diff_lines(old_lines, new_lines, anchor_threshold)
            if script.strategy is not DiffStrategy.MINIMAL:
                log.debug("r%d %s: %s diff (%d hunks)", revision, path, script.strategy, len(script.hunks))
            pairs = added_from_hunks(script.hunks)
        added.extend(AddedLine(revision, path, line_no, text) for line_no, text in pairs)
    return added
