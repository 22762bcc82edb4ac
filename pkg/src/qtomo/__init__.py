"""Simulation and numerical certification toolkit for qubit state tomography
with single-qubit measurements."""
from .pauli import PauliString
from .state import DensityMatrix
from .measurement import PauliBasisMeasurement, ProductPovm, SingleQubitPovm
from .tomography import run_tomography
from .hard_instance import HardInstanceParams, build_instance

__version__ = "0.1.0"

__all__ = ["DensityMatrix", "HardInstanceParams", "PauliBasisMeasurement", "PauliString",
           "ProductPovm", "SingleQubitPovm", "build_instance", "run_tomography", "__version__"]
