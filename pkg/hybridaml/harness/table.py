"""
Fixed-width text rendering of a comparison report.

Cells hold percentages with two decimals, `mean ± std`. A missing std (one
seed) renders as `—`, as does a missing mean. The optional last row holds
hybrid minus synthetic differences in percentage points.
"""

from typing import Dict, Optional, Tuple

from hybridaml.harness.models import (
    COMPARED_METRICS,
    ComparisonReport,
    MetricAggregate,
)

MISSING = "—"
PLUS_MINUS = "±"
MODE_WIDTH = 10
CELL_WIDTH = 18
DELTA_ROW = "delta"
HEADERS = {"accuracy": "accuracy", "f1": "F1", "auc": "AUC"}


def _pct(value: Optional[float]) -> str:
    return MISSING if value is None else f"{100.0 * value:.2f}"


def format_cell(aggregate: MetricAggregate) -> str:
    if aggregate.mean is None:
        return MISSING
    return f"{_pct(aggregate.mean)} {PLUS_MINUS} {_pct(aggregate.std)}"


def emit_table(report: ComparisonReport) -> str:
    lines = [
        "mode".ljust(MODE_WIDTH)
        + "".join(HEADERS[m].ljust(CELL_WIDTH) for m in COMPARED_METRICS)
    ]
    for mode, aggregate in report.aggregates.items():
        lines.append(
            mode.ljust(MODE_WIDTH)
            + "".join(
                format_cell(getattr(aggregate, m)).ljust(CELL_WIDTH)
                for m in COMPARED_METRICS
            )
        )
    if report.deltas is not None:
        cells = []
        for m in COMPARED_METRICS:
            d = report.deltas.get(m)
            cells.append(MISSING if d is None else f"{100.0 * d:+.2f}")
        lines.append(
            DELTA_ROW.ljust(MODE_WIDTH)
            + "".join(c.ljust(CELL_WIDTH) for c in cells)
        )
    return "\n".join(line.rstrip() for line in lines) + "\n"


def _number(token: str) -> Optional[float]:
    return None if token == MISSING else float(token)


def parse_table(
    text: str,
) -> Dict[str, Dict[str, Tuple[Optional[float], Optional[float]]]]:
    """
    Inverse of `emit_table`: mode -> metric -> (mean, std) in percent. The
    delta row maps each metric to `(delta, None)`.
    """
    rows: Dict[str, Dict[str, Tuple[Optional[float], Optional[float]]]] = {}
    for line in text.splitlines()[1:]:
        if not line.strip():
            continue
        mode = line[:MODE_WIDTH].strip()
        row = {}
        for i, metric in enumerate(COMPARED_METRICS):
            start = MODE_WIDTH + i * CELL_WIDTH
            cell = line[start : start + CELL_WIDTH].strip()
            if PLUS_MINUS in cell:
                mean, std = (p.strip() for p in cell.split(PLUS_MINUS))
                row[metric] = (_number(mean), _number(std))
            else:
                row[metric] = (_number(cell), None)
        rows[mode] = row
    return rows
