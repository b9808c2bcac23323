"""Gentle quantum measurements: label-switch measurements, qDP/qDPI bounds, and gentle qubit learning."""
from .gentle import (
    GentlenessParams,
    gentle_np_measurement,
    gentleize_two_outcome,
    np_total_error,
    qdp_delta_bound,
    qls_qubit,
    worst_case_disturbance,
)
from .learning import certify, required_copies_certification, required_copies_tomography, tomography
from .measurements import Measurement, OutcomeDistribution, outcome_distribution, post_measurement_state
from .states import BlochVector, PureState, bloch_to_density, density_to_bloch, trace_distance

__version__ = "0.1.0"
