"""Geometric attitude control with sliced adaptive-neuro mapping (SANM)."""

from .controller import (AttitudeCommand, ControllerGains, ReferenceTrajectory, TrajectoryKind,
                         compute_moment, desired_attitude, desired_rates)
from .loop import ControlLoop, ReferenceLoop
from .rigid_body import (AllocationModel, DisturbanceKind, DisturbanceModel, InertiaTensor,
                         RigidBodyState, Scenario, actual_moment, eval_disturbance, step)
from .sanm import SanmParams, SanmState, sanm_adapt, sanm_estimate, sanm_step
from .so3 import (attitude_error, angular_velocity_error, exp_so3, hat, log_so3, orthonormalize,
                  psi_R, vee)

__version__ = "0.1.0"
