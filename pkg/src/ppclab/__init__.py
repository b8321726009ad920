__version__ = "0.1.0"

from .log import logger
from .core import SequenceMatrix, TorusPointSet, PairCorrCurve, EnergyReport, VarianceEstimate
from .experiment import ExperimentConfig, RunManifest, run_experiment
