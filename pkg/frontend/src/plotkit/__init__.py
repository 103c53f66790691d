"""Figure rendering for nmqsd CSV artifacts."""

from .figures import KINDS, FigureSpec, render
from .schemas import SchemaError, read_table

__version__ = "0.1.0"
