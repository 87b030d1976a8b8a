"""SVG line chart of a prefix-length sweep."""

##############################################################################
# Python imports.
from collections.abc import Sequence
from dataclasses import dataclass

##############################################################################
# Jinja2 imports.
from jinja2 import Environment, PackageLoader, select_autoescape

##############################################################################
# Local imports.
from linemine.evaluation import EvalRow
from linemine.report import ReportSettings
from linemine.utils import format_pct

##############################################################################
# Overall size of the chart.
WIDTH = 720
HEIGHT = 420

##############################################################################
# Space around the plot area: left, right (room for the legend), top, bottom.
MARGIN_LEFT = 60
MARGIN_RIGHT = 190
MARGIN_TOP = 40
MARGIN_BOTTOM = 60

##############################################################################
# The series drawn: name, legend label, row attribute, colour.
SERIES: tuple[tuple[str, str, str, str], ...] = (
    ("precision", "Precision", "precision_pct", "#1f77b4"),
    ("recall", "Recall (conditional)", "recall_conditional_pct", "#d62728"),
    ("f1", "F1", "f1_pct", "#2ca02c"),
)

##############################################################################
# Percentages with a gridline and a label.
Y_TICKS = (0, 20, 40, 60, 80, 100)

_environment = Environment(
    loader=PackageLoader("linemine", "templates"),
    autoescape=select_autoescape(["svg", "xml"]),
    trim_blocks=True,
    lstrip_blocks=True,
)


@dataclass(frozen=True)
class ChartPoint:
    """One plotted value."""

    k: int
    value: str
    x: float
    y: float


@dataclass(frozen=True)
class ChartSeries:
    """One line of the chart."""

    name: str
    label: str
    colour: str
    points: tuple[ChartPoint, ...]

    @property
    def path(self) -> str:
        """The `points` attribute of the series' polyline."""
        return " ".join(f"{point.x:.2f},{point.y:.2f}" for point in self.points)


def _x_position(k: int, k_min: int, k_max: int) -> float:
    """Place a prefix length on the x axis."""
    plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    if k_max == k_min:
        return MARGIN_LEFT + plot_width / 2
    return MARGIN_LEFT + plot_width * (k - k_min) / (k_max - k_min)


def _y_position(percent: float) -> float:
    """Place a percentage on the y axis."""
    plot_height = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    return MARGIN_TOP + plot_height * (1 - percent / 100)


def chart_series(rows: Sequence[EvalRow]) -> list[ChartSeries]:
    """Lay the rows of a sweep out as chart series.

    Undefined values aren't plotted.

    Args:
        rows: The rows of the sweep, ordered by `k`.

    Returns:
        One series per plotted metric.
    """
    if not rows:
        return [ChartSeries(name, label, colour, ()) for name, label, _, colour in SERIES]
    k_min, k_max = rows[0].k, rows[-1].k
    series: list[ChartSeries] = []
    for name, label, attribute, colour in SERIES:
        points: list[ChartPoint] = []
        for row in rows:
            if (value := getattr(row, attribute)) is not None:
                points.append(
                    ChartPoint(
                        k=row.k,
                        value=format_pct(value),
                        x=_x_position(row.k, k_min, k_max),
                        y=_y_position(value),
                    )
                )
        series.append(ChartSeries(name, label, colour, tuple(points)))
    return series


def render_chart(rows: Sequence[EvalRow], settings: ReportSettings, title: str = "") -> str:
    """Render the rows of a sweep as a self-contained SVG line chart.

    The x axis is the prefix length and the y axis the percentage, from 0
    to 100. Every point carries `data-series`, `data-k` and `data-value`
    attributes, the value being formatted exactly as in the results CSV.

    Args:
        rows: The rows of the sweep, ordered by `k`.
        settings: The settings the rows were produced with.
        title: An optional title for the chart.

    Returns:
        The SVG document.
    """
    k_min = rows[0].k if rows else 0
    k_max = rows[-1].k if rows else 0
    return _environment.get_template("chart.svg").render(
        width=WIDTH,
        height=HEIGHT,
        left=MARGIN_LEFT,
        right=WIDTH - MARGIN_RIGHT,
        top=MARGIN_TOP,
        bottom=HEIGHT - MARGIN_BOTTOM,
        title=title or "Precision and recall by number of characters typed",
        settings=settings.header_lines(),
        series=chart_series(rows),
        x_ticks=[(row.k, _x_position(row.k, k_min, k_max)) for row in rows],
        y_ticks=[(tick, _y_position(tick)) for tick in Y_TICKS],
    )


### chart.py ends here
