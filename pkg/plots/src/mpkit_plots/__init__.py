"""Figure rendering for experiment outputs (landscapes, reports, paired runs)."""

from .render import KINDS, FigureSpec, pixel_hash, render
from .schemas import SchemaError, read_dataset, read_landscape, read_paired, read_report

__version__ = "0.1.0"
