"""Figure scripts for blowlab CSV/JSON outputs.

Each figure kind has its own module with a main(argv) entry point; all
of them funnel through render() below.  The scripts only read the
documented CSV columns — no numerics are recomputed beyond the fits
shown on the figures themselves.
"""

from .core import FigureSpec, RenderResult, SchemaError, read_csv, render

__all__ = ["FigureSpec", "RenderResult", "SchemaError", "read_csv",
           "render"]

__version__ = "0.1.0"
