from __future__ import annotations
from pathlib import Path

from .. import __version__
from ..log import full_stack, logger
from .config import ExperimentConfig
from .manifest import RunManifest, TaskStatus, utc_now
from .plot import emit_plot
from .tasks import TASKS, RunContext, TaskResult

MANIFEST_FILE = "manifest.json"


def write_result(result: TaskResult, root: Path, formats: list[str]) -> list[str]:
    """Write the parts of `result` whose format is enabled; returns the written file names."""
    written = []
    try:
        for name, text in result.texts.items():
            if Path(name).suffix.lstrip(".") in formats:
                written.append(name)
                (root / name).write_text(text, encoding="utf-8", newline="\n")
        if "svg" in formats:
            for name, obj in result.plots.items():
                written.append(name)
                emit_plot(obj, root / name)
    except Exception:
        # all or nothing per task
        for name in written:
            (root / name).unlink(missing_ok=True)
        raise
    return written


def run_experiment(
    config: ExperimentConfig, threads: int | None = None, out_dir: str | Path | None = None
) -> RunManifest:
    """
    Run every task of `config` in order and write its outputs and the manifest.

    A failing task is logged and recorded as failed; the remaining tasks
    still run. Files are only written once a task has finished computing.

    :raises OSError: when the output directory cannot be created.
    """
    root = Path(out_dir if out_dir is not None else config.output.directory)
    root.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config.config_hash(), __version__)
    ctx = RunContext(config, threads)

    for task in config.tasks:
        logger.info(f"running task {task.value}")
        try:
            result = TASKS[task](ctx)
            files = write_result(result, root, config.output.formats)
        except Exception as e:
            logger.error(f"task {task.value} failed: {e}")
            logger.debug(full_stack())
            manifest.record(task.value, [], TaskStatus.FAILED, f"{type(e).__name__}: {e}")
            continue
        manifest.record(task.value, files, TaskStatus.OK)

    manifest.finished = utc_now()
    manifest.write(root / MANIFEST_FILE)
    logger.info(f"run {manifest.config_hash[:12]} finished, statuses {manifest.status}")
    return manifest
