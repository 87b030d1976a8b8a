"""CSV results and human-readable reports."""


##############################################################################
# Python imports.
import csv
import io
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

##############################################################################
# Local imports.
from linemine.corpus import FileFilter
from linemine.engine import NormalizationPolicy
from linemine.evaluation import Cohort, EvalRow, PairCounts, SystemSummary, macro_average
from linemine.utils import format_pct

##############################################################################
# The count columns of a results CSV, in order.
COUNT_COLUMNS: tuple[str, ...] = (
    "total_added",
    "suggestible",
    "short_excluded",
    "queries",
    "retrieved_total",
    "relevant_total",
    "hits",
)

##############################################################################
# The percentage columns of a results CSV, in order.
PERCENT_COLUMNS: tuple[str, ...] = (
    "recall_global_pct",
    "recall_conditional_pct",
    "precision_pct",
    "f1_pct",
)

##############################################################################
# Every column of a results CSV, in order.
CSV_COLUMNS: tuple[str, ...] = ("k", *COUNT_COLUMNS, *PERCENT_COLUMNS)

##############################################################################
# The extra column written by an averaged results CSV.
F1_OF_MEANS_COLUMN = "f1_of_means_pct"

##############################################################################
# How the index treats repeated lines.
DEDUP_MODE = "distinct normalized lines"

##############################################################################
# How the diff treats whitespace.
DIFF_MODE = "raw lines (whitespace significant)"


class ReportError(Exception):
    """Raised when results can't be read or combined."""


@dataclass(frozen=True)
class ReportSettings:
    """The settings a set of results was produced with."""

    policy: NormalizationPolicy
    file_filter: FileFilter
    cohort: Cohort

    def header_lines(self) -> list[str]:
        """Describe the settings, one per line.

        Returns:
            The lines of the settings header.
        """
        return [
            f"normalization: {self.policy.describe()}",
            f"file filter: {self.file_filter.describe()}",
            f"cohort: {self.cohort}",
            f"dedup: {DEDUP_MODE}",
            f"diff: {DIFF_MODE}",
        ]


def _row_values(row: EvalRow) -> list[str]:
    """The CSV cells of a row."""
    return [
        str(row.k),
        *(str(getattr(row.counts, column)) for column in COUNT_COLUMNS),
        *(format_pct(getattr(row, column)) for column in PERCENT_COLUMNS),
    ]


def rows_to_csv(rows: Sequence[EvalRow], with_f1_of_means: bool = False) -> str:
    """Render rows as CSV text.

    Args:
        rows: The rows to render.
        with_f1_of_means: Add the averaged-row F1 column.

    Returns:
        The CSV text, with LF line endings.
    """
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow([*CSV_COLUMNS, F1_OF_MEANS_COLUMN] if with_f1_of_means else CSV_COLUMNS)
    for row in rows:
        values = _row_values(row)
        if with_f1_of_means:
            values.append(format_pct(row.f1_of_means_pct))
        writer.writerow(values)
    return output.getvalue()


def write_rows_csv(rows: Sequence[EvalRow], path: Path, with_f1_of_means: bool = False) -> None:
    """Write rows to a CSV file.

    Args:
        rows: The rows to write.
        path: The file to write.
        with_f1_of_means: Add the averaged-row F1 column.
    """
    path.write_bytes(rows_to_csv(rows, with_f1_of_means).encode("utf-8"))


def _parse_pct(text: str, path: Path, line_number: int) -> float | None:
    """Parse a percentage cell; blank means undefined."""
    if not text:
        return None
    try:
        return float(text)
    except ValueError:
        raise ReportError(f"{path}: line {line_number}: bad percentage {text!r}") from None


def read_rows_csv(path: Path) -> list[EvalRow]:
    """Read the rows of a results CSV.

    Args:
        path: The file to read.

    Returns:
        The rows, in file order.

    Raises:
        ReportError: If the file isn't a results CSV.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ReportError(f"{path}: {e.strerror}") from None
    reader = csv.DictReader(io.StringIO(text))
    missing = [column for column in CSV_COLUMNS if column not in (reader.fieldnames or [])]
    if missing:
        raise ReportError(f"{path}: not a results CSV (missing {', '.join(missing)})")
    rows: list[EvalRow] = []
    for line_number, record in enumerate(reader, start=2):
        try:
            k = int(record["k"])
            counts = PairCounts(**{column: int(record[column]) for column in COUNT_COLUMNS})
        except (TypeError, ValueError):
            raise ReportError(f"{path}: line {line_number}: bad count") from None
        try:
            counts.check()
        except ValueError as e:
            raise ReportError(f"{path}: line {line_number}: {e}") from None
        rows.append(
            EvalRow(
                k=k,
                counts=counts,
                recall_global_pct=_parse_pct(record["recall_global_pct"], path, line_number),
                recall_conditional_pct=_parse_pct(record["recall_conditional_pct"], path, line_number),
                precision_pct=_parse_pct(record["precision_pct"], path, line_number),
                f1_pct=_parse_pct(record["f1_pct"], path, line_number),
            )
        )
    return rows


def average_reports(per_system: Sequence[Sequence[EvalRow]]) -> list[EvalRow]:
    """Average the results of several systems, prefix length by prefix length.

    Args:
        per_system: The rows of each system.

    Returns:
        The averaged rows.

    Raises:
        ReportError: If there is nothing to average or the systems were
            evaluated over different prefix lengths.
    """
    if not per_system:
        raise ReportError("No results to average")
    ks = [row.k for row in per_system[0]]
    for rows in per_system[1:]:
        if [row.k for row in rows] != ks:
            raise ReportError("mismatched k ranges between the results being averaged")
    return [macro_average([rows[position] for rows in per_system]) for position in range(len(ks))]


def format_report(
    settings: ReportSettings,
    rows: Sequence[EvalRow],
    summary: SystemSummary | None,
) -> str:
    """Render a human-readable evaluation report.

    Args:
        settings: The settings the results were produced with.
        rows: The rows of the sweep.
        summary: The headline figures, if there are any.

    Returns:
        The report text.
    """
    lines = [f"# {line}" for line in settings.header_lines()]
    if summary is not None:
        lines.extend(
            [
                "",
                f"total added lines:   {summary.total_added}",
                f"suggestible lines:   {summary.suggestible}",
                f"recall (global):     {format_pct(summary.recall_global_pct) or '-'}%",
                f"precision (k={summary.summary_k}):".ljust(21) + f"{format_pct(summary.precision_pct) or '-'}%",
            ]
        )
    if rows:
        lines.extend(["", f"{'k':>3}  {'queries':>8}  {'recall%':>9}  {'precision%':>10}  {'f1%':>9}"])
        for row in rows:
            lines.append(
                f"{row.k:>3}  {row.counts.queries:>8}  {format_pct(row.recall_conditional_pct):>9}"
                f"  {format_pct(row.precision_pct):>10}  {format_pct(row.f1_pct):>9}"
            )
    return "\n".join(lines) + "\n"
