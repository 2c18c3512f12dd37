"""Figure rendering for channel-estimation sweep CSVs.

This package reads the sweep CSV files only; it never imports or invokes
the estimation code, so stored sweeps can be re-rendered anywhere.
"""

from .render import FigureSpec, SchemaError, render

__all__ = ["FigureSpec", "SchemaError", "render"]
