"""Errors raised while validating figure inputs."""


class PlotError(Exception):
    """Base class for figure-rendering errors."""


class MissingColumn(PlotError):
    """Input CSV lacks a column the figure kind requires."""


class EmptyData(PlotError):
    """Input CSV has no data rows, or an inconsistent grid."""


class UnknownFigureKind(PlotError):
    """Requested figure kind is not one of the supported kinds."""
