"""Figure rendering for the koopman-lti CSV artifacts."""

from .figures import FigureSpec, SchemaError, build_figure, default_specs, render

__all__ = ["FigureSpec", "SchemaError", "build_figure", "default_specs", "render"]
