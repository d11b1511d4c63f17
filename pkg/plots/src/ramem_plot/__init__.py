"""Figure rendering for the memory-simulator CSV outputs."""

from .errors import EmptyData, MissingColumn, PlotError, UnknownFigureKind
from .figures import KINDS, FigureSpec, load_columns, render

__version__ = "0.1.0"
