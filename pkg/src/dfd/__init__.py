"""Distributed finite-time differentiators and continuous finite-time consensus on digraphs."""
from .differentiator import (ErrorState, EstimatorState, consensus_control, dfd_a_step,
                             dfd_r_step, error_system_step, innovation_absolute,
                             innovation_relative, signed_power)
from .gains import (GainReport, GainSet, check_gains, derived_constants, minimal_gains,
                    settling_time_bound)
from .graph import (AssumptionViolation, DegenerateSpectrum, DirectedGraph, GraphCertificate,
                    GraphError, build_graph, graph_certificate, is_strongly_connected,
                    laplacian, left_null_vector)
from .lyapunov import certify_decrease, v1_closed_form, v2, v_total

__version__ = "0.1.0"
