from .config import ExperimentConfig, TaskType, ValidationException, load_config
from .encoding import CsvEncoder, JsonEncoder, Table
from .manifest import RunManifest, TaskStatus
from .plot import emit_plot
from .runner import run_experiment
