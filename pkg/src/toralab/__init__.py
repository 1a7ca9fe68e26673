"""Numerical laboratory for eigenfunction equidistribution on rectangular tori."""

from .lattice import (
    Annulus,
    AspectRatio,
    DualVector,
    QValue,
    Spectrum,
    annulus,
    counting_function,
    distinct_spectrum,
    enumerate_up_to,
    inner,
    q_form,
)
from .goodset import (
    GoodSetParams,
    bad_values,
    bad_vector_count,
    certify_good_annulus,
    is_bad_vector,
    q1,
    q2,
    qprime,
    sigma_good_nums,
)
from .potentials import (
    BumpProfile,
    FourierPotential,
    RDMConfig,
    ScattererConfig,
    bump_fourier,
    distorted_lattice,
    grid_positions,
    l2_norm_bound_check,
    rdm_sample,
    scatterer_potential,
    strong_disorder_potential,
    trig_potential,
    weak_disorder_check,
)
from .solver import (
    BasisSet,
    EigenPair,
    TruncatedPair,
    assemble,
    build_basis,
    eigensolve,
    fourier_bound_check,
    tail_sum_bound,
    truncate_eigenfunction,
)
from .diagnostics import (
    Observable,
    RateParams,
    decay_fit,
    discrepancy,
    equi_condition,
    localization_bound,
    matrix_element,
    monomial_pair,
    pair_correlation,
    synthetic_smooth,
    theoretical_rate,
    truncate_observable,
)

__version__ = "0.1.0"
