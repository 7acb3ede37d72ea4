"""Cross-generator alignment: inversion, component edits, edit transfer."""

from .edits import EditSpec, edit_along_component, side_by_side, transfer_edit
from .projection import ProjectionConfig, project_image

__all__ = [
    "EditSpec",
    "ProjectionConfig",
    "edit_along_component",
    "project_image",
    "side_by_side",
    "transfer_edit",
]
