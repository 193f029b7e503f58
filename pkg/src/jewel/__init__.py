"""Joint measurability of POVMs, matrix jewels and incompatibility witnesses."""

from .errors import JewelError, NumericalError, ValidationError
from .povm import MeasurementSet, NoiseModel, Povm, apply_noise, mub_povms, planar_qubit_set, random_set
from .compat import joint_feasibility, robustness, zhu_check
from .spectra import FreeTuple, jewel_membership, jewel_tuple, jewel_vertices, membership
from .witness import WitnessCandidate, apply_witness, classify, is_witness_exact, planar_witness
from .bounds import region_contains, report
from ._kernels import backend

__version__ = "0.1.0"
