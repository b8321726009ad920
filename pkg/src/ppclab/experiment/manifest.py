from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
import datetime as dt

from .encoding import JsonEncoder


class TaskStatus(Enum):
    OK = "ok"
    FAILED = "failed"


def utc_now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """
    Record of one experiment run.

    :param config_hash: sha256 of the canonical configuration.
    :param version: ppclab version that produced the run.
    :param started: UTC start time.
    :param finished: UTC end time, empty while running.
    :param outputs: per task, file names relative to the output directory.
    :param status: per task, `ok` or `failed`.
    :param errors: per failed task, the error message.
    """

    config_hash: str
    version: str
    started: str = field(default_factory=utc_now)
    finished: str = ""
    outputs: dict[str, list[str]] = field(default_factory=dict)
    status: dict[str, str] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def succeeded(self) -> bool:
        return all(s == TaskStatus.OK.value for s in self.status.values())

    def record(self, task: str, files: list[str], status: TaskStatus, error: str = "") -> None:
        self.outputs[task] = files
        self.status[task] = status.value
        if error:
            self.errors[task] = error

    def missing_files(self, root: str | Path) -> list[str]:
        """Listed files of successful tasks that do not exist under `root`."""
        root = Path(root)
        return [
            f
            for task, files in self.outputs.items()
            if self.status.get(task) == TaskStatus.OK.value
            for f in files
            if not (root / f).is_file()
        ]

    def write(self, path: str | Path) -> None:
        Path(path).write_text(JsonEncoder.encode(self), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> RunManifest:
        return cls(**JsonEncoder.decode(Path(path).read_text(encoding="utf-8")))
