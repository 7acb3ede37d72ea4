"""Drag optimization loop: motion supervision, stepping, point tracking."""

from .annotate import annotate_image
from .config import DragConfig, HandlePair
from .loop import RunRecord, drag_step, finalize_run, run_drag
from .loss import motion_loss_and_grad, motion_loss_terms
from .session import DragState, StepRecord, init_session, prefix_basis
from .trace_io import read_trace, step_record_json, write_trace
from .tracking import nearest_match, track_points

__all__ = [
    "DragConfig",
    "DragState",
    "HandlePair",
    "RunRecord",
    "StepRecord",
    "annotate_image",
    "drag_step",
    "finalize_run",
    "init_session",
    "motion_loss_and_grad",
    "motion_loss_terms",
    "nearest_match",
    "prefix_basis",
    "read_trace",
    "run_drag",
    "step_record_json",
    "track_points",
    "write_trace",
]
