"""Render sweep CSVs into figures.

Three figure kinds are supported, one per sweep schema:

- ``gain-curves``: one gain-versus-p curve per fidelity value, drawn in
  descending fidelity order (top curve first).
- ``resource-surface``: heatmap of the qubit-resource difference over
  (p, F); cells with delta_R <= 0 are masked out entirely.
- ``belldiag-heatmap``: channel-averaged error over (alpha2, alpha3) at
  fixed alpha1; non-identifiable (nan) cells are masked.

Rendering is a pure function of the CSV contents: fixed figure geometry,
fixed colormaps, no timestamps, so re-rendering a stored sweep reproduces
the image byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EXPECTED_HEADERS = {
    "gain-curves": ["F", "p", "gain"],
    "resource-surface": ["F", "p", "delta_R"],
    "belldiag-heatmap": ["alpha1", "alpha2", "alpha3", "alpha4", "mean_error"],
}

DEFAULT_LABELS = {
    "gain-curves": ("error probability p", "gain"),
    "resource-surface": ("error probability p", "fidelity F"),
    "belldiag-heatmap": ("alpha2", "alpha3"),
}

_FIGSIZE = (6.4, 4.8)
_DPI = 150


class SchemaError(ValueError):
    """The CSV header does not match the schema of the requested figure."""


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSV, figure kind, output image, axis labels."""

    csv_path: str
    kind: str
    out_path: str
    x_label: str | None = None
    y_label: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in EXPECTED_HEADERS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {sorted(EXPECTED_HEADERS)}")

    @property
    def labels(self) -> tuple[str, str]:
        default_x, default_y = DEFAULT_LABELS[self.kind]
        return (self.x_label or default_x, self.y_label or default_y)


def read_rows(csv_path: str, kind: str) -> list[dict[str, float]]:
    """Read and schema-check one sweep CSV; every cell parsed as a float."""
    expected = EXPECTED_HEADERS[kind]
    with open(csv_path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{csv_path}: file is empty, expected header {expected}") from None
        if header != expected:
            unexpected = [name for name in header if name not in expected]
            missing = [name for name in expected if name not in header]
            raise SchemaError(
                f"{csv_path}: header mismatch for {kind}: missing columns {missing}, "
                f"unexpected columns {unexpected}"
            )
        rows = [dict(zip(expected, (float(cell) for cell in line))) for line in reader if line]
    if not rows:
        raise SchemaError(f"{csv_path}: no data rows")
    return rows


def gain_curves(rows: list[dict[str, float]]) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Group gain rows into per-fidelity curves, highest fidelity first."""
    grouped: dict[float, list[tuple[float, float]]] = {}
    for row in rows:
        grouped.setdefault(row["F"], []).append((row["p"], row["gain"]))
    curves = []
    for fidelity in sorted(grouped, reverse=True):
        points = sorted(grouped[fidelity])
        p = np.array([x for x, _ in points])
        gain = np.array([y for _, y in points])
        curves.append((fidelity, p, gain))
    return curves


def resource_grid(rows: list[dict[str, float]]) -> tuple[np.ndarray, np.ndarray, np.ma.MaskedArray]:
    """Pivot resource rows to a (F, p) grid with delta_R <= 0 masked out."""
    p_values = np.array(sorted({row["p"] for row in rows}))
    f_values = np.array(sorted({row["F"] for row in rows}))
    grid = np.full((f_values.size, p_values.size), np.nan)
    p_index = {value: i for i, value in enumerate(p_values)}
    f_index = {value: i for i, value in enumerate(f_values)}
    for row in rows:
        grid[f_index[row["F"]], p_index[row["p"]]] = row["delta_R"]
    masked = np.ma.masked_invalid(grid)
    masked = np.ma.masked_less_equal(masked, 0.0)
    return p_values, f_values, masked


def belldiag_grid(rows: list[dict[str, float]]) -> tuple[np.ndarray, np.ndarray, np.ma.MaskedArray]:
    """Pivot Bell-diagonal rows to an (alpha3, alpha2) grid, nan cells masked."""
    a2_values = np.array(sorted({row["alpha2"] for row in rows}))
    a3_values = np.array(sorted({row["alpha3"] for row in rows}))
    grid = np.full((a3_values.size, a2_values.size), np.nan)
    a2_index = {value: i for i, value in enumerate(a2_values)}
    a3_index = {value: i for i, value in enumerate(a3_values)}
    for row in rows:
        grid[a3_index[row["alpha3"]], a2_index[row["alpha2"]]] = row["mean_error"]
    return a2_values, a3_values, np.ma.masked_invalid(grid)


def render(spec: FigureSpec) -> "plt.Figure":
    """Render one figure from its CSV and write it to ``spec.out_path``."""
    rows = read_rows(spec.csv_path, spec.kind)
    x_label, y_label = spec.labels
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)

    if spec.kind == "gain-curves":
        styles = ["-", "--", ":", "-."]
        for index, (fidelity, p, gain) in enumerate(gain_curves(rows)):
            ax.plot(p, gain, styles[index % len(styles)], label=f"F = {fidelity:g}")
        ax.axhline(0.0, color="0.6", linewidth=0.8)
        ax.legend()
    elif spec.kind == "resource-surface":
        p_values, f_values, masked = resource_grid(rows)
        mesh = ax.pcolormesh(p_values, f_values, masked, shading="nearest", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="delta_R")
    else:
        a2_values, a3_values, masked = belldiag_grid(rows)
        mesh = ax.pcolormesh(a2_values, a3_values, masked, shading="nearest", cmap="magma")
        fig.colorbar(mesh, ax=ax, label="mean error")

    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    fig.tight_layout()
    fig.savefig(spec.out_path)
    return fig


def _main(kind: str, argv: list[str] | None) -> int:
    parser = argparse.ArgumentParser(description=f"Render a {kind} figure from a sweep CSV.")
    parser.add_argument("csv_path", help="input sweep CSV")
    parser.add_argument("out_path", help="output image path")
    parser.add_argument("--x-label", default=None)
    parser.add_argument("--y-label", default=None)
    args = parser.parse_args(argv)
    try:
        fig = render(FigureSpec(args.csv_path, kind, args.out_path, args.x_label, args.y_label))
        plt.close(fig)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main_gain(argv: list[str] | None = None) -> int:
    return _main("gain-curves", argv)


def main_resources(argv: list[str] | None = None) -> int:
    return _main("resource-surface", argv)


def main_belldiag(argv: list[str] | None = None) -> int:
    return _main("belldiag-heatmap", argv)
