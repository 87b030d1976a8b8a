"""Replaying added lines as completion attempts, and scoring the results.

Every line added in revision i+1 is treated as a line a programmer went
on to type. If its normalized text already existed in revision i it is
*suggestible*; its first `k` characters are then used as the prefix of
a completion query against revision i, and the suggestions that come
back are judged against the line itself.

Two recall figures are reported, because two different ratios go by
that name:

* global recall: suggestible lines over all added lines;
* conditional recall: suggestible lines whose query found them, over
  all suggestible lines.

Precision pools the suggestions of every query in a run. Runs for
different systems are combined by averaging their percentages.
"""

##############################################################################
# Python imports.
import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, fields
from enum import StrEnum
from pathlib import Path
from statistics import fmean
from typing import NamedTuple

##############################################################################
# Local imports.
from linemine.adddb import AddedLineDb
from linemine.corpus import CorpusError, FileFilter, language_of, load_manifest, load_snapshot
from linemine.diff import AddedLine, RevisionPairMismatchError
from linemine.engine import (
    NormalizationPolicy,
    PrefixIndex,
    RecencyMap,
    Suggestion,
    build_index,
    normalize,
    target_prefix,
)

##############################################################################
# The prefix length the per-system summary reports precision for.
DEFAULT_SUMMARY_K = 10

log = logging.getLogger(__name__)


class UndefinedMetricError(ArithmeticError):
    """Raised when a metric has a zero denominator."""


class Cohort(StrEnum):
    """Which suggestible lines are replayed at every prefix length."""

    ALL = "all"
    """Every suggestible line; lines too short for `k` count as misses."""

    FIXED = "fixed"
    """Only lines long enough for the largest `k`, so every `k` replays the same lines."""


@dataclass
class PairCounts:
    """The raw counts of an evaluation."""

    total_added: int = 0
    """Added lines considered."""

    suggestible: int = 0
    """Added lines whose normalized text exists in the previous revision."""

    short_excluded: int = 0
    """Suggestible lines too short to leave anything to complete."""

    queries: int = 0
    """Completion queries issued."""

    retrieved_total: int = 0
    """Suggestions returned over all queries."""

    relevant_total: int = 0
    """Suggestions that exactly matched the line being completed."""

    hits: int = 0
    """Queries that returned at least one relevant suggestion."""

    def __add__(self, other: "PairCounts") -> "PairCounts":
        return PairCounts(
            **{item.name: getattr(self, item.name) + getattr(other, item.name) for item in fields(self)}
        )

    def check(self) -> None:
        """Check the counts are consistent with each other.

        Raises:
            ValueError: If an invariant between the counts is broken.
        """
        if not (self.hits <= self.queries <= self.suggestible <= self.total_added):
            raise ValueError(f"Inconsistent counts: {self}")
        if self.relevant_total > self.retrieved_total:
            raise ValueError(f"More relevant than retrieved suggestions: {self}")
        if self.queries != self.suggestible - self.short_excluded:
            raise ValueError(f"Queries don't account for every suggestible line: {self}")


@dataclass(frozen=True)
class EvalRow:
    """The counts and metrics for one prefix length."""

    k: int
    """The prefix length."""

    counts: PairCounts
    """The counts, summed over every revision pair."""

    recall_global_pct: float | None
    """Suggestible over added lines, as a percentage."""

    recall_conditional_pct: float | None
    """Suggestible lines found by their query, as a percentage."""

    precision_pct: float | None
    """Relevant over retrieved suggestions, as a percentage."""

    f1_pct: float | None
    """Harmonic mean of precision and conditional recall.

    For an averaged row this is the mean of the per-system values.
    """

    f1_of_means_pct: float | None = None
    """For an averaged row, the harmonic mean of the averaged precision and recall."""


class QueryJudgement(NamedTuple):
    """How one completion query fared."""

    retrieved: int
    relevant: int
    hit: bool


@dataclass(frozen=True)
class GroupSweep:
    """The sweep of one group of added lines."""

    rows: list[EvalRow]
    """One row per prefix length, ordered by `k`."""

    reach: PairCounts
    """Every added line and every suggestible one, whatever the cohort."""


@dataclass(frozen=True)
class SystemSummary:
    """The headline figures of one system."""

    total_added: int
    suggestible: int
    recall_global_pct: float | None
    summary_k: int
    precision_pct: float | None


def judge_query(suggestions: Sequence[Suggestion], candidate_norm: str) -> QueryJudgement:
    """Judge the suggestions returned for a line.

    Args:
        suggestions: The suggestions returned for the line's prefix.
        candidate_norm: The normalized line being completed.

    Returns:
        How many suggestions came back, how many were the line itself, and
        whether the line was found at all.
    """
    relevant = sum(1 for suggestion in suggestions if suggestion.text == candidate_norm)
    return QueryJudgement(retrieved=len(suggestions), relevant=relevant, hit=relevant > 0)


def _judge_in_index(index: PrefixIndex, prefix: str, candidate_norm: str) -> QueryJudgement:
    """Judge a query without materialising its suggestions.

    Ranking doesn't change which suggestions come back, so the judgement
    only needs the size of the prefix range and whether the candidate
    falls inside it. The index holds each text once, so at most one
    suggestion can be relevant.
    """
    start, end = index.prefix_range(prefix)
    relevant = int(candidate_norm.startswith(prefix) and candidate_norm in index)
    return QueryJudgement(retrieved=end - start, relevant=relevant, hit=relevant > 0)


def eval_revision_pair(
    index_prev: PrefixIndex,
    added: Sequence[AddedLine],
    k: int,
    policy: NormalizationPolicy,
    cohort_min_len: int | None = None,
) -> PairCounts:
    """Replay the lines added in one revision against the revision before.

    Args:
        index_prev: The index of the previous revision.
        added: The lines added in the revision after `index_prev`'s.
        k: The prefix length.
        policy: The normalization policy.
        cohort_min_len: When given, only suggestible lines at least this
            long (normalized) are replayed.

    Returns:
        The counts for the pair.

    Raises:
        RevisionPairMismatchError: If an added line isn't from the revision
            that follows the indexed one.
    """
    counts = PairCounts(total_added=len(added))
    for line in added:
        if line.revision != index_prev.revision + 1:
            raise RevisionPairMismatchError(
                f"revision-pair-mismatch: line {line.file}:{line.line_no} was added in revision "
                f"{line.revision}, not {index_prev.revision + 1}"
            )
        norm = normalize(line.text, policy)
        if norm is None or norm not in index_prev:
            continue
        if cohort_min_len is not None and len(norm) < cohort_min_len:
            continue
        counts.suggestible += 1
        prefix = target_prefix(norm, k)
        if prefix is None:
            counts.short_excluded += 1
            continue
        judgement = _judge_in_index(index_prev, prefix, norm)
        counts.queries += 1
        counts.retrieved_total += judgement.retrieved
        counts.relevant_total += judgement.relevant
        counts.hits += judgement.hit
    return counts


def _reach(index_prev: PrefixIndex, added: Sequence[AddedLine], policy: NormalizationPolicy) -> PairCounts:
    """Count the added lines, and those the previous revision could have suggested."""
    suggestible = sum(
        1 for line in added if (norm := normalize(line.text, policy)) is not None and norm in index_prev
    )
    return PairCounts(total_added=len(added), suggestible=suggestible)


def recall_global_pct(counts: PairCounts) -> float:
    """Suggestible lines as a percentage of all added lines.

    Raises:
        UndefinedMetricError: If there are no added lines.
    """
    if counts.total_added == 0:
        raise UndefinedMetricError("undefined-metric: no added lines")
    return 100.0 * counts.suggestible / counts.total_added


def recall_conditional_pct(counts: PairCounts) -> float:
    """Suggestible lines found by their query, as a percentage.

    Lines too short to be queried count as misses.

    Raises:
        UndefinedMetricError: If there are no suggestible lines.
    """
    if counts.suggestible == 0:
        raise UndefinedMetricError("undefined-metric: no suggestible lines")
    return 100.0 * counts.hits / counts.suggestible


def precision_pct(counts: PairCounts) -> float:
    """Relevant suggestions as a percentage of all suggestions returned.

    Raises:
        UndefinedMetricError: If no suggestions were returned.
    """
    if counts.retrieved_total == 0:
        raise UndefinedMetricError("undefined-metric: no suggestions were retrieved")
    return 100.0 * counts.relevant_total / counts.retrieved_total


def f1_pct(precision: float, recall: float) -> float:
    """The harmonic mean of a precision and a recall.

    Raises:
        UndefinedMetricError: If both are zero.
    """
    if precision + recall <= 0:
        raise UndefinedMetricError("undefined-metric: precision and recall are both zero")
    return 2.0 * precision * recall / (precision + recall)


def _or_none(metric: Callable[..., float], *args: float | PairCounts | None) -> float | None:
    """Evaluate a metric, turning an undefined result into `None`."""
    if any(arg is None for arg in args):
        return None
    try:
        return metric(*args)
    except UndefinedMetricError:
        return None


def make_row(k: int, counts: PairCounts) -> EvalRow:
    """Compute the metrics of a set of counts.

    Args:
        k: The prefix length the counts are for.
        counts: The counts.

    Returns:
        The row, with `None` for every undefined metric.

    Raises:
        ValueError: If the counts are inconsistent.
    """
    counts.check()
    precision = _or_none(precision_pct, counts)
    recall = _or_none(recall_conditional_pct, counts)
    return EvalRow(
        k=k,
        counts=counts,
        recall_global_pct=_or_none(recall_global_pct, counts),
        recall_conditional_pct=recall,
        precision_pct=precision,
        f1_pct=_or_none(f1_pct, precision, recall),
    )


def sweep_groups(
    corpus_root: Path,
    db: AddedLineDb,
    k_min: int,
    k_max: int,
    policy: NormalizationPolicy,
    cohort: Cohort,
    file_filter: FileFilter,
    groups: Mapping[str, Callable[[str], bool]],
) -> dict[str, GroupSweep]:
    """Sweep prefix lengths for several groups of added lines at once.

    The corpus is walked once: for every consecutive pair of revisions the
    older one is indexed, with recency taken from the history up to it,
    and each group's added lines are replayed against it at every `k`.

    Args:
        corpus_root: The root directory of the corpus.
        db: The Added Line Database of the corpus.
        k_min: The smallest prefix length.
        k_max: The largest prefix length.
        policy: The normalization policy.
        cohort: Which suggestible lines to replay.
        file_filter: Decides which files make up a snapshot.
        groups: Group name mapped to a predicate on the file of an added
            line.

    Returns:
        Group name mapped to that group's sweep. Every group's rows are
        empty when the database is empty.

    Raises:
        ValueError: If the prefix lengths are out of range.
        CorpusError: If the corpus has fewer than two revisions.
        DatabaseRangeError: If the database doesn't fit the corpus.
    """
    if not 1 <= k_min <= k_max:
        raise ValueError(f"Prefix lengths must satisfy 1 <= k_min <= k_max (got {k_min}, {k_max})")
    manifest = load_manifest(corpus_root)
    if len(manifest) < 2:
        raise CorpusError(f"insufficient-history: {corpus_root} has {len(manifest)} revision(s)")
    if not db.records:
        log.warning("The Added Line Database is empty; there is nothing to evaluate")
        return {name: GroupSweep([], PairCounts()) for name in groups}
    db.check_range(len(manifest))

    ks = range(k_min, k_max + 1)
    cohort_min_len = k_max + 1 if cohort is Cohort.FIXED else None
    totals = {name: {k: PairCounts() for k in ks} for name in groups}
    reach = {name: PairCounts() for name in groups}
    by_revision = db.by_revision()
    previous = load_snapshot(corpus_root, manifest[0], file_filter)
    recency = RecencyMap()
    recency.seed(previous, policy)
    for desc in manifest[1:]:
        index = build_index(previous, recency, policy)
        added = by_revision.get(desc.index, [])
        for name, wanted in groups.items():
            subset = [line for line in added if wanted(line.file)]
            reach[name] = reach[name] + _reach(index, subset, policy)
            for k in ks:
                totals[name][k] = totals[name][k] + eval_revision_pair(index, subset, k, policy, cohort_min_len)
        log.debug("r%d: %d added lines replayed against %d indexed lines", desc.index, len(added), len(index))
        recency.advance(added, policy)
        previous = load_snapshot(corpus_root, desc, file_filter)
    return {name: GroupSweep([make_row(k, counts[k]) for k in ks], reach[name]) for name, counts in totals.items()}


def sweep(
    corpus_root: Path,
    db: AddedLineDb,
    k_min: int,
    k_max: int,
    policy: NormalizationPolicy,
    cohort: Cohort,
    file_filter: FileFilter | None = None,
) -> list[EvalRow]:
    """Evaluate a corpus at every prefix length from `k_min` to `k_max`.

    Args:
        corpus_root: The root directory of the corpus.
        db: The Added Line Database of the corpus.
        k_min: The smallest prefix length.
        k_max: The largest prefix length.
        policy: The normalization policy.
        cohort: Which suggestible lines to replay.
        file_filter: Decides which files make up a snapshot.

    Returns:
        One row per prefix length, ordered by `k`; empty for an empty
        database.
    """
    return sweep_groups(
        corpus_root,
        db,
        k_min,
        k_max,
        policy,
        cohort,
        file_filter or FileFilter(),
        {"all": lambda _: True},
    )["all"].rows


def sweep_by_language(
    corpus_root: Path,
    db: AddedLineDb,
    k_min: int,
    k_max: int,
    policy: NormalizationPolicy,
    cohort: Cohort,
    file_filter: FileFilter | None = None,
) -> dict[str, list[EvalRow]]:
    """Evaluate a corpus, splitting the added lines by language.

    Args:
        corpus_root: The root directory of the corpus.
        db: The Added Line Database of the corpus.
        k_min: The smallest prefix length.
        k_max: The largest prefix length.
        policy: The normalization policy.
        cohort: Which suggestible lines to replay.
        file_filter: Decides which files make up a snapshot.

    Returns:
        Language mapped to its rows. The suggestions still come from the
        whole codebase; only the replayed lines are split.
    """
    languages = sorted({language_of(record.file) for record in db.records})
    results = sweep_groups(
        corpus_root,
        db,
        k_min,
        k_max,
        policy,
        cohort,
        file_filter or FileFilter(),
        {language: (lambda path, language=language: language_of(path) == language) for language in languages},
    )
    return {language: result.rows for language, result in results.items()}


def _mean(values: Sequence[float | None]) -> float | None:
    """Average the defined values, if there are any."""
    defined = [value for value in values if value is not None]
    return fmean(defined) if defined else None


def macro_average(per_system_rows: Sequence[EvalRow]) -> EvalRow:
    """Average the rows of several systems for the same prefix length.

    Percentages are averaged arithmetically, ignoring systems where they
    are undefined; counts are summed. The F1 of the result is the mean of
    the systems' F1 values, and the harmonic mean of the averaged
    precision and recall is kept alongside it.

    Args:
        per_system_rows: One row per system.

    Returns:
        The averaged row.

    Raises:
        ValueError: If there are no rows or they are for different `k`.
    """
    if not per_system_rows:
        raise ValueError("Nothing to average")
    k = per_system_rows[0].k
    if any(row.k != k for row in per_system_rows):
        raise ValueError("Can only average rows for the same prefix length")
    counts = PairCounts()
    for row in per_system_rows:
        counts = counts + row.counts
    precision = _mean([row.precision_pct for row in per_system_rows])
    recall = _mean([row.recall_conditional_pct for row in per_system_rows])
    return EvalRow(
        k=k,
        counts=counts,
        recall_global_pct=_mean([row.recall_global_pct for row in per_system_rows]),
        recall_conditional_pct=recall,
        precision_pct=precision,
        f1_pct=_mean([row.f1_pct for row in per_system_rows]),
        f1_of_means_pct=_or_none(f1_pct, precision, recall),
    )


def system_summary(
    rows: Sequence[EvalRow], summary_k: int = DEFAULT_SUMMARY_K, reach: PairCounts | None = None
) -> SystemSummary | None:
    """Pull the headline figures of a system out of its sweep.

    Args:
        rows: The rows of the sweep.
        summary_k: The prefix length to report precision for.
        reach: Every added and suggestible line, whatever the cohort; when
            not given, the counts of the first row are used.

    Returns:
        The summary, or `None` if there are no rows.
    """
    if not rows:
        return None
    counts = rows[0].counts if reach is None else reach
    at_k = next((row for row in rows if row.k == summary_k), None)
    return SystemSummary(
        total_added=counts.total_added,
        suggestible=counts.suggestible,
        recall_global_pct=_or_none(recall_global_pct, counts),
        summary_k=summary_k,
        precision_pct=at_k.precision_pct if at_k else None,
    )
