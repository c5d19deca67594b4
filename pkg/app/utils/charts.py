"""
SVG Charts

Thin matplotlib helpers rendering to SVG with the Agg backend. The SVG hash
salt is fixed and the date metadata dropped so identical data gives
byte-identical files.
"""

import io
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from app.enum.colors import ChartColors, RowColors  # noqa: E402
from app.utils.files import atomic_write_text  # noqa: E402

SVG_METADATA = {'Date': None}

plt.rcParams['svg.hashsalt'] = 'drivestate'
plt.rcParams['svg.fonttype'] = 'none'


def _save(fig, path: Path) -> Path:
    buffer = io.StringIO()
    fig.savefig(buffer, format='svg', metadata=SVG_METADATA, bbox_inches='tight')
    plt.close(fig)
    return atomic_write_text(Path(path), buffer.getvalue())


def line_chart(path: Path, x: Sequence[float], series: dict, title: str, xlabel: str,
               ylabel: str, secondary: Optional[dict] = None, secondary_label: str = '') -> Path:
    """
    Line chart with an optional second y axis.

    Args:
        path: Output SVG
        x: Shared x values
        series: Label -> (values, color) on the left axis
        secondary: Label -> (values, color) on the right axis
    """
    fig, ax = plt.subplots(figsize=(7, 4))
    for label, (values, color) in series.items():
        ax.plot(x, values, marker='o', markersize=3, color=color, label=label)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    handles, labels = ax.get_legend_handles_labels()

    if secondary:
        right = ax.twinx()
        for label, (values, color) in secondary.items():
            right.plot(x, values, marker='s', markersize=3, color=color, label=label)
        right.set_ylabel(secondary_label)
        extra_handles, extra_labels = right.get_legend_handles_labels()
        handles += extra_handles
        labels += extra_labels

    ax.legend(handles, labels, loc='best', fontsize='small')
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def heatmap(path: Path, table: np.ndarray, row_labels: Sequence, col_labels: Sequence,
            title: str, row_name: str, col_name: str) -> Path:
    fig, ax = plt.subplots(figsize=(1.2 * len(col_labels) + 2, 0.8 * len(row_labels) + 1.5))
    image = ax.imshow(np.ma.masked_invalid(table), cmap='viridis', vmin=0.0, vmax=1.0, aspect='auto')
    ax.set_xticks(range(len(col_labels)), labels=[str(c) for c in col_labels])
    ax.set_yticks(range(len(row_labels)), labels=[str(r) for r in row_labels])
    ax.set_xlabel(col_name)
    ax.set_ylabel(row_name)
    ax.set_title(title)
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            text = '-' if np.isnan(table[i, j]) else f"{table[i, j]:.3f}"
            ax.text(j, i, text, ha='center', va='center', color=ChartColors.NEUTRAL.value, fontsize='small')
    fig.colorbar(image, ax=ax)
    return _save(fig, path)


def stacked_bars(path: Path, rows: np.ndarray, categories: Sequence[str], row_labels: Sequence[str],
                 title: str, ylabel: str) -> Path:
    """One bar per category with each row stacked on top of the previous ones."""
    fig, ax = plt.subplots(figsize=(7, 4))
    bottom = np.zeros(len(categories))
    for index, (values, label) in enumerate(zip(rows, row_labels)):
        ax.bar(categories, values, bottom=bottom, color=RowColors.cycle(index), label=label)
        bottom = bottom + values
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    ax.legend(loc='best', fontsize='small')
    return _save(fig, path)


def grouped_bars(path: Path, rows: np.ndarray, categories: Sequence[str], row_labels: Sequence[str],
                 title: str, ylabel: str) -> Path:
    """Side-by-side bars, one group per category and one bar per row."""
    fig, ax = plt.subplots(figsize=(max(7, 0.5 * len(categories) * len(row_labels)), 4))
    width = 0.8 / max(len(row_labels), 1)
    positions = np.arange(len(categories))
    for index, (values, label) in enumerate(zip(rows, row_labels)):
        ax.bar(positions + index * width, values, width=width, color=RowColors.cycle(index), label=label)
    ax.set_xticks(positions + 0.4 - width / 2, labels=list(categories))
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    ax.legend(loc='best', fontsize='small')
    return _save(fig, path)
