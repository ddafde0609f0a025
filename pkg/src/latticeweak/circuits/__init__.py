"""Gate-level circuits: IR, Trotter-step compilation, state preparation, resources."""
from .compile import (CNOT_TARGETS, beta_step_circuit, cancel_cnots, ghz_circuits, strong_step_circuit,
                      trotter_step_circuit)
from .ir import Circuit, Gate
from .prep import derived_angles, state_prep_circuit, vqe_angles
from .resources import ResourceEstimate, resource_estimate
