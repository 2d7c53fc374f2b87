"""Figures from corrclust benchmark CSVs; the CSV schema is the only interface."""

from .figures import FigureSpec, plot_acceptance, plot_curves, plot_histogram, render
from .schema import SchemaError

__all__ = [
    "FigureSpec",
    "SchemaError",
    "plot_acceptance",
    "plot_curves",
    "plot_histogram",
    "render",
]
