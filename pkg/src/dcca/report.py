"""Aggregate CSV I/O and static SVG charts of Monte Carlo results."""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

from .montecarlo import ESTIMATORS, AggregateRow

CSV_FIELDS = ("estimator", "d", "rho_true", "T", "s", "q025", "median", "q975", "sd", "reps")
CSV_HEADER = ",".join(CSV_FIELDS)


class SchemaError(ValueError):
    """A CSV line does not follow the aggregate schema."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


def format_real(v: float) -> str:
    """Six significant digits, ``.`` as decimal point, no negative zero."""
    v = float(v)
    if v == 0.0:
        v = 0.0
    return f"{v:.6g}"


def format_row(row: AggregateRow) -> str:
    return ",".join(
        [
            row.estimator,
            format_real(row.d),
            format_real(row.rho_true),
            str(int(row.T)),
            "" if row.s is None else str(int(row.s)),
            format_real(row.q025),
            format_real(row.median),
            format_real(row.q975),
            format_real(row.sd),
            str(int(row.reps)),
        ]
    )


def csv_text(rows: Sequence[AggregateRow]) -> str:
    return "".join(line + "\n" for line in [CSV_HEADER, *(format_row(r) for r in rows)])


def write_csv(rows: Sequence[AggregateRow], destination) -> int:
    """Write ``rows`` in the aggregate schema; return the number of bytes written.

    ``destination`` is a path or a writable text/binary stream.
    """
    if not rows:
        raise ValueError("no rows to write")
    data = csv_text(rows).encode("utf-8")
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(data)
    elif isinstance(destination, io.TextIOBase):
        destination.write(data.decode("utf-8"))
    else:
        destination.write(data)
    return len(data)


def _parse_real(text: str, name: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise SchemaError(line, f"{name}={text!r} is not a number") from None
    if not math.isfinite(v):
        raise SchemaError(line, f"{name}={text!r} is not finite")
    return v


def _parse_int(text: str, name: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise SchemaError(line, f"{name}={text!r} is not an integer") from None


def parse_csv(text: str) -> list[AggregateRow]:
    """Parse aggregate CSV text, raising :class:`SchemaError` with a 1-based line number."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0].rstrip("\r") != CSV_HEADER:
        raise SchemaError(1, f"expected header {CSV_HEADER!r}")
    rows = []
    for lineno, fields in enumerate(csv.reader(lines[1:]), start=2):
        if len(fields) != len(CSV_FIELDS):
            raise SchemaError(lineno, f"expected {len(CSV_FIELDS)} fields, got {len(fields)}")
        est = fields[0]
        if est not in ESTIMATORS:
            raise SchemaError(lineno, f"unknown estimator {est!r}")
        if est == "pearson":
            if fields[4] != "":
                raise SchemaError(lineno, "s must be empty for pearson rows")
            s = None
        else:
            s = _parse_int(fields[4], "s", lineno)
        row = AggregateRow(
            estimator=est,
            d=_parse_real(fields[1], "d", lineno),
            rho_true=_parse_real(fields[2], "rho_true", lineno),
            T=_parse_int(fields[3], "T", lineno),
            s=s,
            q025=_parse_real(fields[5], "q025", lineno),
            median=_parse_real(fields[6], "median", lineno),
            q975=_parse_real(fields[7], "q975", lineno),
            sd=_parse_real(fields[8], "sd", lineno),
            reps=_parse_int(fields[9], "reps", lineno),
        )
        if not (row.q025 <= row.median <= row.q975):
            raise SchemaError(lineno, "quantiles out of order")
        if row.sd < 0 or row.reps < 1:
            raise SchemaError(lineno, "sd must be >= 0 and reps >= 1")
        rows.append(row)
    return rows


def read_csv(path) -> list[AggregateRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read())


# --------------------------------------------------------------------- charts

WIDTH, HEIGHT = 480, 360
LEFT, RIGHT, TOP, BOTTOM = 60, 110, 36, 48
REF_COLOUR = "#d62728"

DCCA_KINDS = ("median", "sd")
PEARSON_KINDS = ("median", "band", "sd")


@dataclass(frozen=True)
class ChartSpec:
    estimator: str
    T: int
    d: float | None  # facet value; None for pearson charts
    kind: str
    y_range: tuple[float, float]

    @property
    def filename(self) -> str:
        if self.estimator == "dcca":
            return f"dcca_T{self.T}_d{format_real(self.d)}_{self.kind}.svg"
        return f"pearson_T{self.T}_{self.kind}.svg"


def _grey(i: int, n: int, darkest_first: bool) -> str:
    # black .. light grey (75%), never white
    frac = 0.0 if n <= 1 else i / (n - 1)
    if not darkest_first:
        frac = 1.0 - frac
    level = round(0.75 * 255 * frac)
    return f"#{level:02x}{level:02x}{level:02x}"


def _nice_ceiling(v: float) -> float:
    if v <= 0:
        return 0.1
    step = 10 ** math.floor(math.log10(v))
    for m in (1, 2, 2.5, 5, 10):
        if m * step >= v:
            return m * step
    return 10 * step


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


class _Canvas:
    def __init__(self, x_range, y_range, title, x_label, y_label):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.parts: list[str] = []
        self._frame(title, x_label, y_label)

    def px(self, x: float) -> float:
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)

    def py(self, y: float) -> float:
        return HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)

    def _frame(self, title, x_label, y_label):
        w, h = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
        p = self.parts
        p.append(f'<rect x="{LEFT}" y="{TOP}" width="{w}" height="{h}" fill="none" stroke="#000" stroke-width="1"/>')
        for t in _ticks(self.x0, self.x1):
            x = self.px(t)
            p.append(f'<line x1="{x:.2f}" y1="{HEIGHT - BOTTOM}" x2="{x:.2f}" y2="{HEIGHT - BOTTOM + 4}" stroke="#000"/>')
            p.append(f'<text x="{x:.2f}" y="{HEIGHT - BOTTOM + 16}" font-size="10" text-anchor="middle">{_tick_label(t)}</text>')
        for t in _ticks(self.y0, self.y1):
            y = self.py(t)
            p.append(f'<line x1="{LEFT - 4}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="#000"/>')
            p.append(f'<text x="{LEFT - 6}" y="{y + 3:.2f}" font-size="10" text-anchor="end">{_tick_label(t)}</text>')
        p.append(f'<text x="{LEFT + w / 2:.2f}" y="{TOP - 14}" font-size="12" text-anchor="middle">{escape(title)}</text>')
        p.append(f'<text x="{LEFT + w / 2:.2f}" y="{HEIGHT - 10}" font-size="11" text-anchor="middle">{escape(x_label)}</text>')
        p.append(
            f'<text x="14" y="{TOP + h / 2:.2f}" font-size="11" text-anchor="middle" '
            f'transform="rotate(-90 14 {TOP + h / 2:.2f})">{escape(y_label)}</text>'
        )

    def polyline(self, segments: Iterable[list[tuple[float, float]]], colour: str, dashed=False, width=1.2):
        dash = ' stroke-dasharray="4 3"' if dashed else ""
        for seg in segments:
            pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in seg)
            if len(seg) == 1:
                (x, y), = seg
                self.parts.append(f'<circle cx="{self.px(x):.2f}" cy="{self.py(y):.2f}" r="1.8" fill="{colour}"/>')
            else:
                self.parts.append(
                    f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="{width}"{dash}/>'
                )

    def legend(self, entries: list[tuple[str, str]]):
        x = WIDTH - RIGHT + 10
        for i, (label, colour) in enumerate(entries):
            y = TOP + 8 + 14 * i
            self.parts.append(f'<line x1="{x}" y1="{y}" x2="{x + 16}" y2="{y}" stroke="{colour}" stroke-width="2"/>')
            self.parts.append(f'<text x="{x + 20}" y="{y + 3}" font-size="10">{escape(label)}</text>')

    def document(self) -> str:
        body = "\n".join(self.parts)
        return (
            '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#fff"/>\n'
            f"{body}\n</svg>\n"
        )


def _tick_label(t: float) -> str:
    return format_real(round(t, 10))


def _segments(points: dict[float, float], grid: list[float]) -> list[list[tuple[float, float]]]:
    """Split a curve into runs of consecutive grid points that are present."""
    out, run = [], []
    for x in grid:
        if x in points:
            run.append((x, points[x]))
        elif run:
            out.append(run)
            run = []
    if run:
        out.append(run)
    return out


def _render(spec: ChartSpec, series: list[tuple[str, list[AggregateRow]]], darkest_first: bool) -> str:
    grid = sorted({r.rho_true for _, rows in series for r in rows})
    if spec.estimator == "dcca":
        title = f"DCCA coefficient, T={spec.T}, d={format_real(spec.d)}"
    else:
        title = f"Pearson correlation, T={spec.T}"
    y_label = "standard deviation" if spec.kind == "sd" else "estimate"
    canvas = _Canvas((-1.0, 1.0), spec.y_range, title, "true correlation", y_label)
    if spec.kind != "sd":
        canvas.polyline([[(-1.0, -1.0), (1.0, 1.0)]], REF_COLOUR, width=1.0)
    legend = []
    n = len(series)
    for i, (label, rows) in enumerate(series):
        colour = _grey(i, n, darkest_first)
        by_rho = {r.rho_true: r for r in rows}
        legend.append((label, colour))
        if spec.kind == "sd":
            canvas.polyline(_segments({k: r.sd for k, r in by_rho.items()}, grid), colour)
            continue
        if spec.kind == "median":
            canvas.polyline(_segments({k: r.median for k, r in by_rho.items()}, grid), colour)
        if spec.kind == "band" or (spec.kind == "median" and spec.estimator == "dcca"):
            canvas.polyline(_segments({k: r.q025 for k, r in by_rho.items()}, grid), colour, dashed=True)
            canvas.polyline(_segments({k: r.q975 for k, r in by_rho.items()}, grid), colour, dashed=True)
    canvas.legend(legend)
    return canvas.document()


def _sd_range(rows) -> tuple[float, float]:
    return (0.0, _nice_ceiling(max(r.sd for r in rows) * 1.05))


def chart_specs(rows: Sequence[AggregateRow], kinds: Sequence[str] | None = None):
    """Yield ``(ChartSpec, series)`` for every facet present in ``rows``.

    DCCA facets are (T, d) with one series per scale, darkest for the smallest
    scale; Pearson facets are T with one series per d, darkest for the largest d.
    """
    dcca = [r for r in rows if r.estimator == "dcca"]
    prs = [r for r in rows if r.estimator == "pearson"]
    for T, d in sorted({(r.T, r.d) for r in dcca}):
        facet = [r for r in dcca if r.T == T and r.d == d]
        series = [(f"s={s}", [r for r in facet if r.s == s]) for s in sorted({r.s for r in facet})]
        for kind in DCCA_KINDS:
            if kinds is not None and kind not in kinds:
                continue
            yr = _sd_range(facet) if kind == "sd" else (-1.0, 1.0)
            yield ChartSpec("dcca", T, d, kind, yr), series, True
    for T in sorted({r.T for r in prs}):
        facet = [r for r in prs if r.T == T]
        series = [(f"d={format_real(d)}", [r for r in facet if r.d == d]) for d in sorted({r.d for r in facet})]
        for kind in PEARSON_KINDS:
            if kinds is not None and kind not in kinds:
                continue
            yr = _sd_range(facet) if kind == "sd" else (-1.0, 1.0)
            yield ChartSpec("pearson", T, None, kind, yr), series, False


def render_charts(rows: Sequence[AggregateRow], out_dir, kinds: Sequence[str] | None = None) -> list[Path]:
    """Write one SVG per chart facet into ``out_dir``; return the written paths.

    Facets whose series cover different sets of ``rho_true`` are rendered with
    gaps and trigger a warning.
    """
    if not rows:
        raise ValueError("no rows to plot")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for spec, series, darkest_first in chart_specs(rows, kinds):
        grid = {r.rho_true for _, rs in series for r in rs}
        if any({r.rho_true for r in rs} != grid for _, rs in series):
            warnings.warn(f"incomplete facet {spec.filename}: some series miss rho values", stacklevel=2)
        path = out / spec.filename
        path.write_bytes(_render(spec, series, darkest_first).encode("utf-8"))
        written.append(path)
    return written
