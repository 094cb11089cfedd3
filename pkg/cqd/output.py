"""
Result emission for the command line: canonical JSON, CSV and SVG.

Results go to stdout or to ``--out``; the provenance header goes to stderr so
that result streams stay byte-identical between runs.
"""

import csv
import io
import json
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel
from rich.console import Console
from rich.table import Table

logger = structlog.get_logger(__name__)

FLOAT_FORMAT = ".12g"


def _format_float(value: float) -> str:
    return format(value, FLOAT_FORMAT)


def canonicalize(value: Any) -> Any:
    """Plain JSON-ready data with floats rounded to 12 significant digits."""
    if isinstance(value, BaseModel):
        return canonicalize(value.model_dump(mode="python"))
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Mapping):
        return {str(key): canonicalize(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonicalize(item) for item in value]
    if isinstance(value, np.ndarray):
        return [canonicalize(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(_format_float(value))
    if isinstance(value, complex):
        return {"re": canonicalize(value.real), "im": canonicalize(value.imag)}
    return value


def to_json(value: Any) -> str:
    return json.dumps(canonicalize(value), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return _format_float(value) if math.isfinite(value) else "nan"
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def records_to_csv(records: Sequence[Mapping[str, Any]], header: Optional[Sequence[str]] = None) -> str:
    if header is None:
        header = list(records[0].keys()) if records else []
    return to_csv(header, ([record[key] for key in header] for record in records))


def to_svg(curves: Mapping[str, Tuple[Sequence[float], Sequence[float]]],
           points: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
           xlabel: str = "current (A)", ylabel: str = "flip fraction",
           log_y: bool = False, title: Optional[str] = None) -> str:
    """
    Render a log-x line chart as an SVG document.

    One line per curve; ``points`` are drawn as open circles. Output is
    deterministic: fixed hash salt and no date metadata.
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "cqd", "svg.fonttype": "none",
                                "font.size": 10, "axes.linewidth": 0.8}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for label, (x, y) in curves.items():
            ax.plot(x, y, linewidth=1.2, label=label)
        if points is not None:
            ax.plot(points[0], points[1], "o", markerfacecolor="none", markeredgecolor="black",
                    label="data")
        ax.set_xscale("log")
        if log_y:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, fontsize=8)
        fig.tight_layout()
        buffer = io.StringIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buffer.getvalue()


def emit(text: str, out: Optional[Union[str, Path]] = None):
    """Write a result document to ``out`` or stdout."""
    if out is None or str(out) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    path.write_text(text, encoding="utf-8")
    logger.info("Output written", path=str(path), size=len(text))


def print_provenance(command: str, version: str, config: Dict[str, Any],
                     extra: Optional[Dict[str, Any]] = None, console: Optional[Console] = None):
    """Resolved configuration printed to stderr ahead of the results."""
    console = console or Console(stderr=True, highlight=False, soft_wrap=True)
    table = Table(title=f"cqd {version} · {command}", show_header=False, box=None)
    table.add_column("key", style="bold")
    table.add_column("value")
    flat: List[Tuple[str, Any]] = []
    for key, value in sorted({**config, **(extra or {})}.items()):
        if isinstance(value, dict):
            flat.extend((f"{key}.{sub}", item) for sub, item in sorted(value.items()))
        else:
            flat.append((key, value))
    for key, value in flat:
        table.add_row(key, json.dumps(canonicalize(value)))
    console.print(table)
