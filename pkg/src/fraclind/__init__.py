"""Fractional powers of Lindblad superoperators on truncated Hilbert spaces.

Builds Markovian generators as matrices on vectorized operator space,
takes their fractional powers by three cross-checking routes (spectral
calculus, resolvent integral, kernel-weighted subordination), evolves
observables and density operators under the resulting semigroups, and
ships closed-form damped-oscillator solutions as analytic oracles.
"""

from . import errors
from .fracpower import (
    FractionalMethod,
    TimeSeries,
    balakrishnan_power,
    evolve_density,
    evolve_observable,
    kato_resolvent,
    spectral_power,
    subordinated_map,
)
from .liouville import (
    LindbladModel,
    OperationReport,
    SuperOperator,
    adjoint_generator,
    check_quantum_operation,
    choi_matrix,
    commutator_generator,
    density_generator,
    dissipator_generator,
    interaction_generator,
    kraus_apply,
    lindblad_generator,
    multiplication_superops,
    semigroup_map,
    unvectorize,
    vectorize,
)
from .matrix_engine import (
    EigDecomposition,
    eig_decompose,
    linear_solve,
    matrix_exp,
    matrix_function,
    min_hermitian_eigenvalue,
)
from .oscillator import (
    DampedOscParams,
    GaussianState,
    OscParams,
    classical_solution,
    coherent_state,
    damped_fock_model,
    damped_params,
    damped_phi,
    fock_operators,
    frac_damped_coeffs,
    frac_damped_solution,
    frac_osc_coeffs,
    frac_osc_solution,
    free_fock_model,
    gaussian_moments,
    macdonald_damped_coeffs,
)
from .subordinator import (
    QuadratureRule,
    SubordinatorSpec,
    density,
    density_half,
    laplace_transform_check,
    normalization_check,
    quadrature_rule,
    subordinated_exponential,
    subordinated_exponential_exact,
)

__version__ = "0.1.0"
