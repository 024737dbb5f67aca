"""Maneuver identification with a bank of Kalman/extended Kalman filters."""
__version__ = "0.1.0"

from .errors import (CalibrationError, ConfigError, DegenerateBankError, DomainError,
                     ManeuverError, NumericalError, ReportIOError, SingularInnovationError)
from .filter_core import (GaussianBelief, Innovation, NoiseConfig, StateVector, ekf_predict,
                          gaussian_likelihood, kf_predict, kf_update)
from .motion_models import (JacobianMode, LaneChangeParams, ManeuverKind, ManeuverModel,
                            lane_change_jacobian, lane_change_propagate, measurement_matrix,
                            standard_models, straight_transition)
from .mmae_bank import (DetectionPolicy, DetectionResult, FilterBank, bank_step, combine,
                        detect, init_bank, run_bank)
from .vehicle_sim import (SteeringKind, SteeringProfile, VehicleParams, VehicleScenario,
                          VehicleState, calibrate_amplitude, lane_change_scenario, simulate,
                          step_rk4)
from .measurements import (MeasurementSeries, NoiseSpec, generate_from_model,
                           generate_from_vehicle, read_series, write_series)
from .experiments import (ExperimentConfig, ExperimentReport, Stage, emit_report, load_config,
                          run_case, run_suite, run_sweep, run_vehicle_eval)
