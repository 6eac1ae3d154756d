"""Image-to-feature export package for the incremental Voronoi classifier."""

from .backbone import load_backbone
from .export import ExportResult, ExportSpec, export

__all__ = ["ExportResult", "ExportSpec", "export", "load_backbone"]
