from .errors import QSynapseError, NotHermitian, ZeroProbabilityOutcome, InvariantViolation, ParseError
from .state import BasisLabel
from .synapse import SynapseParams
from .evolution import ModelParams, IntegratorConfig, CoupledState
from .evolution import evolve, r_min_sweep
from .trajectories import TrajectoryConfig, run_trajectory, ensemble_average
from .config import ExperimentConfig, parse_config, load_presets
from .series import write_series, read_series
from .metrics import report_metrics
