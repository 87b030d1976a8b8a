"""Tests for the evaluation module."""

import logging
import random
from collections.abc import Callable
from pathlib import Path

import pytest

from linemine.adddb import AddedLineDb, DatabaseRangeError, build_db
from linemine.corpus import CorpusError, FileFilter, RevisionDescriptor, Snapshot, load_manifest, load_snapshot
from linemine.diff import AddedLine, RevisionPairMismatchError
from linemine.engine import NormalizationPolicy, PrefixIndex, RecencyMap, build_index, normalize
from linemine.evaluation import (
    Cohort,
    EvalRow,
    PairCounts,
    UndefinedMetricError,
    eval_revision_pair,
    f1_pct,
    macro_average,
    make_row,
    precision_pct,
    recall_conditional_pct,
    recall_global_pct,
    sweep,
    sweep_by_language,
    system_summary,
)

DEFAULTS = NormalizationPolicy()

VOCABULARY = [
    "int a;",
    "int b = 0;",
    "int count;",
    "int counter = 1;",
    "return a;",
    "return 0;",
    "a++;",
    "if (a) {",
    "if (a > b) {",
    "}",
    "b = a + 1;",
    "foo(a, b);",
    "foo(b);",
    "x",
]


def _mini_history(seed: int) -> list[dict[str, str]]:
    """A random five-revision history where lines are often reused."""
    rng = random.Random(seed)
    files = {name: [rng.choice(VOCABULARY) for _ in range(size)] for name, size in (("a.c", 20), ("B.java", 15))}
    revisions = []
    for _ in range(5):
        revisions.append({name: "\n".join(lines) + "\n" for name, lines in files.items()})
        for lines in files.values():
            for _ in range(rng.randint(1, 6)):
                if rng.random() < 0.3:
                    line = f"v{rng.randint(0, 999)} = {rng.randint(0, 9)};"
                else:
                    line = "    " * rng.randint(0, 2) + rng.choice(VOCABULARY)
                lines.insert(rng.randint(0, len(lines)), line)
            for _ in range(rng.randint(0, 2)):
                del lines[rng.randrange(len(lines))]
    return revisions


def _naive_counts(root: Path, db: AddedLineDb, k: int, k_max: int, cohort: Cohort) -> PairCounts:
    """Count a sweep row with plain loops over every line of every snapshot."""
    manifest = load_manifest(root)
    counts = PairCounts()
    for desc in manifest[1:]:
        previous = load_snapshot(root, manifest[desc.index - 1], FileFilter())
        texts = {
            text for lines in previous.files.values() for raw in lines if (text := normalize(raw, DEFAULTS)) is not None
        }
        for record in db.records:
            if record.revision != desc.index:
                continue
            counts.total_added += 1
            norm = normalize(record.text, DEFAULTS)
            if norm is None or norm not in texts:
                continue
            if cohort is Cohort.FIXED and len(norm) < k_max + 1:
                continue
            counts.suggestible += 1
            if len(norm) <= k:
                counts.short_excluded += 1
                continue
            matches = [text for text in texts if text.startswith(norm[:k])]
            relevant = matches.count(norm)
            counts.queries += 1
            counts.retrieved_total += len(matches)
            counts.relevant_total += relevant
            counts.hits += relevant > 0
    return counts


def _row(
    k: int = 10,
    precision: float | None = None,
    recall: float | None = None,
    global_recall: float | None = None,
    f1: float | None = None,
) -> EvalRow:
    """Build a row with just the metrics filled in."""
    return EvalRow(
        k=k,
        counts=PairCounts(),
        recall_global_pct=global_recall,
        recall_conditional_pct=recall,
        precision_pct=precision,
        f1_pct=f1,
    )


def _index_of(lines: list[str]) -> Snapshot:
    """A revision 0 snapshot of one file."""
    return Snapshot(revision=RevisionDescriptor(0, "rev0"), files={"a.c": tuple(lines)})


class TestMetrics:
    """Tests for the metric functions."""

    @pytest.mark.parametrize(
        ("suggestible", "total", "expected"),
        [(158, 918, 17.21), (341, 1555, 21.92), (606, 3378, 17.94), (327, 1046, 31.26)],
    )
    def test_recall_global(self, suggestible: int, total: int, expected: float) -> None:
        """Global recall is suggestible over added lines."""
        assert recall_global_pct(PairCounts(total_added=total, suggestible=suggestible)) == pytest.approx(
            expected, abs=0.01
        )

    def test_recall_global_undefined(self) -> None:
        """Global recall needs added lines."""
        with pytest.raises(UndefinedMetricError, match="undefined-metric"):
            recall_global_pct(PairCounts())

    def test_recall_conditional(self) -> None:
        """Conditional recall is hits over suggestible lines."""
        assert recall_conditional_pct(PairCounts(total_added=10, suggestible=4, queries=4, hits=3)) == 75.0

    def test_recall_conditional_undefined(self) -> None:
        """Conditional recall needs suggestible lines."""
        with pytest.raises(UndefinedMetricError):
            recall_conditional_pct(PairCounts(total_added=3))

    def test_precision(self) -> None:
        """Precision is relevant over retrieved suggestions."""
        assert precision_pct(PairCounts(retrieved_total=8, relevant_total=2)) == 25.0

    def test_precision_undefined(self) -> None:
        """Precision needs retrieved suggestions."""
        with pytest.raises(UndefinedMetricError):
            precision_pct(PairCounts())

    @pytest.mark.parametrize(
        ("precision", "recall", "expected"),
        [(50.0, 50.0, 50.0), (90.0, 10.0, 18.0), (83.5325, 71.71, 77.17), (100.0, 0.0, 0.0)],
    )
    def test_f1(self, precision: float, recall: float, expected: float) -> None:
        """F1 is the harmonic mean."""
        assert f1_pct(precision, recall) == pytest.approx(expected, abs=0.005)

    def test_f1_undefined(self) -> None:
        """F1 of nothing is undefined."""
        with pytest.raises(UndefinedMetricError):
            f1_pct(0.0, 0.0)

    def test_f1_lies_between_its_inputs(self) -> None:
        """The harmonic mean is never outside the range of its inputs."""
        rng = random.Random(3)
        for _ in range(10_000):
            precision, recall = rng.uniform(0.01, 100.0), rng.uniform(0.01, 100.0)
            f1 = f1_pct(precision, recall)
            assert min(precision, recall) - 1e-9 <= f1 <= max(precision, recall) + 1e-9


class TestPairCounts:
    """Tests for PairCounts."""

    def test_addition(self) -> None:
        """Counts add field by field."""
        one = PairCounts(1, 1, 0, 1, 2, 1, 1)
        two = PairCounts(3, 2, 1, 1, 4, 0, 0)
        assert one + two == PairCounts(4, 3, 1, 2, 6, 1, 1)

    def test_consistent(self) -> None:
        """Consistent counts pass the check."""
        PairCounts(
            total_added=5, suggestible=3, short_excluded=1, queries=2, retrieved_total=6, relevant_total=1, hits=1
        ).check()

    @pytest.mark.parametrize(
        "counts",
        [
            PairCounts(total_added=1, suggestible=2, queries=2),
            PairCounts(total_added=2, suggestible=1, queries=1, hits=2),
            PairCounts(total_added=1, suggestible=1, queries=1, retrieved_total=1, relevant_total=2),
            PairCounts(total_added=2, suggestible=2, queries=1),
        ],
    )
    def test_inconsistent(self, counts: PairCounts) -> None:
        """Counts that can't happen fail the check."""
        with pytest.raises(ValueError):
            counts.check()


class TestMakeRow:
    """Tests for make_row."""

    def test_nothing_added(self) -> None:
        """Every metric of an empty count is undefined."""
        row = make_row(3, PairCounts())
        assert (row.recall_global_pct, row.recall_conditional_pct, row.precision_pct, row.f1_pct) == (
            None,
            None,
            None,
            None,
        )

    def test_nothing_suggestible(self) -> None:
        """Added lines with nothing suggestible give a global recall of zero, and nothing else."""
        row = make_row(1, PairCounts(total_added=5))
        assert row.recall_global_pct == 0.0
        assert row.recall_conditional_pct is None
        assert row.precision_pct is None
        assert row.f1_pct is None

    def test_all_defined(self) -> None:
        """Every metric is computed from the counts."""
        row = make_row(2, PairCounts(4, 2, 0, 2, 4, 2, 2))
        assert row.recall_global_pct == 50.0
        assert row.recall_conditional_pct == 100.0
        assert row.precision_pct == 50.0
        assert row.f1_pct == pytest.approx(200.0 / 3.0)
        assert row.f1_of_means_pct is None

    def test_inconsistent_counts(self) -> None:
        """Counts that can't come from one evaluation are refused."""
        with pytest.raises(ValueError):
            make_row(1, PairCounts(total_added=1, suggestible=2, queries=2))


class TestEvalRevisionPair:
    """Tests for eval_revision_pair."""

    ADDED = [
        AddedLine(1, "a.c", 4, "  int counter;"),
        AddedLine(1, "a.c", 5, "brand_new();"),
        AddedLine(1, "a.c", 6, "}"),
    ]

    def _index(self) -> PrefixIndex:
        return build_index(_index_of(["int count = 0;", "int counter;", "float x;"]), RecencyMap(), DEFAULTS)

    def test_query(self) -> None:
        """A suggestible line is queried with its first k characters."""
        counts = eval_revision_pair(self._index(), self.ADDED, 5, DEFAULTS)
        assert counts == PairCounts(
            total_added=3, suggestible=1, short_excluded=0, queries=1, retrieved_total=2, relevant_total=1, hits=1
        )
        counts.check()

    def test_too_short(self) -> None:
        """A line with nothing left to complete is excluded, and counts as a miss."""
        counts = eval_revision_pair(self._index(), self.ADDED, 12, DEFAULTS)
        assert (counts.suggestible, counts.short_excluded, counts.queries, counts.hits) == (1, 1, 0, 0)

    def test_cohort_length(self) -> None:
        """Lines shorter than the cohort length aren't replayed at all."""
        counts = eval_revision_pair(self._index(), self.ADDED, 5, DEFAULTS, cohort_min_len=13)
        assert (counts.total_added, counts.suggestible, counts.queries) == (3, 0, 0)

    def test_wrong_revision(self) -> None:
        """Added lines must come from the revision after the indexed one."""
        with pytest.raises(RevisionPairMismatchError, match="revision-pair-mismatch"):
            eval_revision_pair(self._index(), [AddedLine(2, "a.c", 1, "x;")], 1, DEFAULTS)

    def test_no_added_lines(self) -> None:
        """Nothing added gives empty counts."""
        assert eval_revision_pair(self._index(), [], 1, DEFAULTS) == PairCounts()


class TestSweep:
    """Tests for sweep."""

    HISTORY = [
        {"a.c": "int a;\nint b;\n"},
        {"a.c": "int a;\nint b;\nint a;\n"},
        {"a.c": "int a;\nint b;\nint a;\nint b;\n}\n"},
    ]

    def test_hand_counted(self, make_corpus: Callable[..., Path]) -> None:
        """Counts are pooled over every pair of revisions."""
        root = make_corpus(self.HISTORY)
        rows = sweep(root, build_db(root, load_manifest(root), FileFilter()), 1, 6, DEFAULTS, Cohort.ALL)
        assert [row.k for row in rows] == [1, 2, 3, 4, 5, 6]
        first = rows[0]
        assert first.counts == PairCounts(3, 2, 0, 2, 4, 2, 2)
        assert first.recall_global_pct == pytest.approx(200.0 / 3.0)
        assert first.recall_conditional_pct == 100.0
        assert first.precision_pct == 50.0
        assert first.counts == rows[3].counts
        assert rows[4].counts == PairCounts(3, 2, 0, 2, 2, 2, 2)
        last = rows[5]
        assert last.counts == PairCounts(3, 2, 2, 0, 0, 0, 0)
        assert last.recall_conditional_pct == 0.0
        assert last.precision_pct is None
        assert last.f1_pct is None

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("cohort", list(Cohort))
    def test_matches_naive_replay(self, make_corpus: Callable[..., Path], seed: int, cohort: Cohort) -> None:
        """Every row equals a plain nested-loop replay of the history."""
        root = make_corpus(_mini_history(seed), name=f"mini{seed}")
        db = build_db(root, load_manifest(root), FileFilter())
        for row in sweep(root, db, 1, 8, DEFAULTS, cohort):
            expected = _naive_counts(root, db, row.k, 8, cohort)
            assert row.counts == expected
            row.counts.check()
            assert row == make_row(row.k, expected)

    @pytest.mark.parametrize("seed", range(6))
    def test_one_character_finds_every_line(self, make_corpus: Callable[..., Path], seed: int) -> None:
        """With one character typed, every suggestible line of two or more characters is found."""
        root = make_corpus(_mini_history(seed))
        db = build_db(root, load_manifest(root), FileFilter())
        (row,) = sweep(root, db, 1, 1, DEFAULTS, Cohort.FIXED)
        assert row.counts.suggestible > 0
        assert row.recall_conditional_pct == 100.0

    @pytest.mark.parametrize("seed", range(6))
    def test_fixed_cohort_laws(self, make_corpus: Callable[..., Path], seed: int) -> None:
        """In a fixed cohort recall stays at 100% and precision never falls."""
        root = make_corpus(_mini_history(seed))
        db = build_db(root, load_manifest(root), FileFilter())
        rows = sweep(root, db, 1, 5, DEFAULTS, Cohort.FIXED)
        assert len({row.counts.queries for row in rows}) == 1
        for row in rows:
            assert row.recall_conditional_pct in (100.0, None)
        precisions = [row.precision_pct for row in rows if row.precision_pct is not None]
        for before, after in zip(precisions, precisions[1:], strict=False):
            assert after >= before - 1e-9

    @pytest.mark.parametrize("seed", range(6))
    def test_all_cohort_recall_never_rises(self, make_corpus: Callable[..., Path], seed: int) -> None:
        """Typing more characters never finds more lines."""
        root = make_corpus(_mini_history(seed))
        db = build_db(root, load_manifest(root), FileFilter())
        recalls = [row.recall_conditional_pct for row in sweep(root, db, 1, 20, DEFAULTS, Cohort.ALL)]
        assert all(recall is not None for recall in recalls)
        for before, after in zip(recalls, recalls[1:], strict=False):
            assert after <= before

    def test_deterministic(self, make_corpus: Callable[..., Path]) -> None:
        """Sweeping twice gives the same rows."""
        root = make_corpus(_mini_history(42))
        db = build_db(root, load_manifest(root), FileFilter())
        assert sweep(root, db, 1, 11, DEFAULTS, Cohort.ALL) == sweep(root, db, 1, 11, DEFAULTS, Cohort.ALL)

    def test_empty_database(self, make_corpus: Callable[..., Path], caplog: pytest.LogCaptureFixture) -> None:
        """A history that adds nothing has nothing to evaluate."""
        root = make_corpus([{"a.c": "x;\n"}, {"a.c": "x;\n"}])
        with caplog.at_level(logging.WARNING, logger="linemine"):
            assert sweep(root, AddedLineDb(), 1, 11, DEFAULTS, Cohort.ALL) == []
        assert "empty" in caplog.text

    def test_insufficient_history(self, make_corpus: Callable[..., Path]) -> None:
        """A single revision can't be evaluated."""
        root = make_corpus([{"a.c": "x;\n"}])
        with pytest.raises(CorpusError, match="insufficient-history"):
            sweep(root, AddedLineDb(), 1, 11, DEFAULTS, Cohort.ALL)

    @pytest.mark.parametrize(("k_min", "k_max"), [(0, 5), (3, 2)])
    def test_bad_prefix_lengths(self, small_corpus: Path, k_min: int, k_max: int) -> None:
        """The prefix lengths must be a non-empty range starting at one or more."""
        with pytest.raises(ValueError):
            sweep(small_corpus, AddedLineDb(), k_min, k_max, DEFAULTS, Cohort.ALL)

    def test_database_for_another_corpus(self, small_corpus: Path) -> None:
        """Records beyond the corpus's revisions are refused."""
        with pytest.raises(DatabaseRangeError):
            sweep(small_corpus, AddedLineDb([AddedLine(5, "a.c", 1, "x;")]), 1, 2, DEFAULTS, Cohort.ALL)


class TestSweepByLanguage:
    """Tests for sweep_by_language."""

    def test_split_adds_up(self, make_corpus: Callable[..., Path]) -> None:
        """Each language gets its own rows, and their counts add up to the whole."""
        root = make_corpus(_mini_history(8))
        db = build_db(root, load_manifest(root), FileFilter())
        by_language = sweep_by_language(root, db, 1, 4, DEFAULTS, Cohort.ALL)
        assert sorted(by_language) == ["C", "Java"]
        whole = sweep(root, db, 1, 4, DEFAULTS, Cohort.ALL)
        for position, row in enumerate(whole):
            assert by_language["C"][position].counts + by_language["Java"][position].counts == row.counts


class TestMacroAverage:
    """Tests for macro_average."""

    def test_precision(self) -> None:
        """Precisions are averaged arithmetically."""
        rows = [_row(precision=value) for value in (90.02, 87.52, 78.23, 78.36)]
        assert macro_average(rows).precision_pct == pytest.approx(83.5325, abs=1e-9)

    def test_global_recall(self) -> None:
        """Global recalls are averaged arithmetically."""
        rows = [_row(global_recall=value) for value in (17.21, 21.92, 17.94, 31.26)]
        assert macro_average(rows).recall_global_pct == pytest.approx(22.0825, abs=1e-9)

    def test_f1_two_ways(self) -> None:
        """The averaged F1 is the mean of F1s, with the F1 of the means alongside."""
        rows = [
            _row(precision=100.0, recall=50.0, f1=f1_pct(100.0, 50.0)),
            _row(precision=50.0, recall=100.0, f1=f1_pct(50.0, 100.0)),
        ]
        average = macro_average(rows)
        assert average.f1_pct == pytest.approx(200.0 / 3.0)
        assert average.f1_of_means_pct == pytest.approx(75.0)

    def test_undefined_values_are_left_out(self) -> None:
        """Systems where a metric is undefined don't drag the mean down."""
        average = macro_average([_row(precision=80.0), _row(precision=None)])
        assert average.precision_pct == 80.0
        assert average.recall_conditional_pct is None
        assert average.f1_of_means_pct is None

    def test_counts_are_summed(self) -> None:
        """Counts add up across systems."""
        one = EvalRow(1, PairCounts(2, 1, 0, 1, 3, 1, 1), None, None, None, None)
        two = EvalRow(1, PairCounts(4, 2, 1, 1, 2, 1, 1), None, None, None, None)
        assert macro_average([one, two]).counts == PairCounts(6, 3, 1, 2, 5, 2, 2)

    def test_nothing_to_average(self) -> None:
        """There must be rows to average."""
        with pytest.raises(ValueError):
            macro_average([])

    def test_different_prefix_lengths(self) -> None:
        """Only rows for the same prefix length can be averaged."""
        with pytest.raises(ValueError):
            macro_average([_row(k=1), _row(k=2)])


class TestSystemSummary:
    """Tests for system_summary."""

    def test_summary(self) -> None:
        """The summary takes precision at the chosen prefix length."""
        rows = [
            EvalRow(k, PairCounts(total_added=10, suggestible=3), 30.0, None, 10.0 * k, None) for k in range(1, 12)
        ]
        summary = system_summary(rows, summary_k=10)
        assert summary is not None
        assert (summary.total_added, summary.suggestible, summary.recall_global_pct) == (10, 3, 30.0)
        assert summary.precision_pct == 100.0

    def test_prefix_length_not_swept(self) -> None:
        """A prefix length outside the sweep has no precision."""
        summary = system_summary([_row(k=1, precision=50.0)], summary_k=10)
        assert summary is not None
        assert summary.precision_pct is None

    def test_no_rows(self) -> None:
        """No rows, no summary."""
        assert system_summary([]) is None

    def test_reach_replaces_replayed_counts(self) -> None:
        """Every added and suggestible line counts, not just the replayed cohort."""
        rows = [EvalRow(1, PairCounts(total_added=3, suggestible=1, queries=1), 33.3, 100.0, 50.0, None)]
        summary = system_summary(rows, summary_k=1, reach=PairCounts(total_added=3, suggestible=2))
        assert summary is not None
        assert (summary.total_added, summary.suggestible) == (3, 2)
        assert summary.recall_global_pct == pytest.approx(200 / 3)
        assert summary.precision_pct == 50.0
