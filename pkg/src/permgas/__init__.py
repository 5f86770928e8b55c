"""permgas: cycle-weighted random permutations and spatial random permutations.

Two closely related models:

* a non-spatial measure on permutations of n elements where each cycle of
  length ell pays a weight alpha_ell (module `cycles`, with the normalization
  sequence h_n at its center), and
* a spatial model of permutations of points in a periodic box where jumps pay
  a Gaussian energy as well (modules `thermo`, `lattice`, `occupation`,
  `spatial`).

The spatial model is exactly solvable through its Fourier occupation numbers;
above the critical density rho_c the zero mode condenses and macroscopic
cycles carry the excess density.  Everything exact is computed exactly
(recursions, convolution DP, adaptive quadrature with certified tails); a
Metropolis chain covers the rest and is cross-validated against the exact
representation.
"""

from .weights import Tail, WeightSequence
from .cycles import (
    CycleTypeSample, HSeries, OracleResult,
    cycle_type_distribution, enumerate_oracle, expected_cycle_numbers,
    expected_total_cycles, first_cycle_length_dist, h_crosscheck, h_series,
    sample_permutation, shift_covariance_check, theorem21_scan,
)
from .thermo import (
    DualityReport, GaussianDispersion, TabulatedDispersion, ThermoResult,
    critical_density, density, duality_and_shift_check, free_energy, pressure,
    pressure_periodic_finite, thermo_curves,
)
from .lattice import ModeLattice, auto_lattice, build_lattice, lattice_from_modes
from .occupation import (
    DPTables, MacroscopicScan, ModeMarginals, OccupationState, SmallEnumeration,
    TypicalityReport, cycle_density_expectation, enumerate_small,
    macroscopic_scan, mode_marginals, n0_law_and_mgf, partition_dp,
    sample_occupations, sample_occupations_batch, typicality_probs,
)
from .spatial import (
    ChainResult, CrossValidateCase, CrossValidateReport, MCParams, SpatialState,
    XiPotential, cross_validate, hamiltonian, mc_step, periodized_xi, run_chain,
)
from .errors import (
    CertificateError, ConfigError, PermgasError, QuadratureError, SizeCapError,
    UnboundedSearchError,
)

__version__ = "0.1.0"
