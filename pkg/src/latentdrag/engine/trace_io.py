"""Line-delimited JSON traces with a fixed field order."""

from __future__ import annotations

import json
from pathlib import Path

from .loop import RunRecord
from .session import StepRecord

STEP_FIELDS = (
    "iteration",
    "motion_loss",
    "grad_magnitude",
    "t_opt",
    "t_track",
    "mean_distance",
    "max_distance",
)


def step_record_json(record: StepRecord) -> str:
    payload = {name: getattr(record, name) for name in STEP_FIELDS}
    return json.dumps(payload)


def write_trace(record: RunRecord, path) -> None:
    """One StepRecord per line, terminal summary object last."""
    lines = [step_record_json(step) for step in record.trace]
    lines.append(json.dumps(record.summary_dict()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_trace(path) -> tuple[list[dict], dict]:
    lines = Path(path).read_text().strip().splitlines()
    steps = [json.loads(line) for line in lines[:-1]]
    return steps, json.loads(lines[-1])
