"""Exact and FFT-backed arithmetic for convolution powers of discrete laws.

Sparse lattice distributions, their convolution powers and compound Poisson
(accompanying) laws, Kolmogorov and polyhedral distances, concentration
functions, and the experiment harness that measures how fast F^n approaches
e(nF) and F^(n+k).
"""

from .charfn import ClassCertificate, certify_alpha, cf_eval, is_symmetric
from .convolve import ConvolutionBudget, convolve, power, power_sequence
from .cpois import (
    CompoundPoissonSpec,
    RareEventSpec,
    accompanying,
    accompanying_product,
    compound_poisson,
    d0_law,
    rare_event_sum,
)
from .dist import (
    GridDistribution,
    SparseDistribution,
    from_atoms,
    from_literal,
    median_center,
    mixture,
    point_mass,
    project,
    reflect,
    shift,
    symmetrize,
    tensor,
    to_literal,
    total_variation,
)
from .errors import PolyconvError
from .metrics import (
    DirectionSearchConfig,
    Polyhedron,
    concentration_Q,
    kolmogorov,
    polyhedral_distance,
    polyhedron_measure,
    projection_length,
    q_value,
)

__version__ = "0.1.0"
