"""Iterated Carmichael lambda machinery and cycle structure of power maps."""

from .arith import (
    FactoredNumber,
    big_omega,
    carmichael_lambda,
    coprime_part,
    ell_map,
    euler_phi,
    factor,
    is_prime,
    lambda_iter,
    largest_prime_factor,
    lcm_factored,
    phi_iter,
    tau,
    valuation,
)
from .cycles import (
    CycleCensus,
    census_bruteforce,
    census_structural,
    cycle_count_upper_bound,
    cycle_length_of,
    is_cyclic_element,
    phi_coprime_part,
    unit_cycles_lower_bound,
)
from .chains import (
    ChainTrace,
    build_nj,
    chain_length,
    chain_length_table,
    ell_chain,
    lambda_chain,
    lcm_1_to_j,
    power_of_3_chain,
    sophie_germain_chain,
)
from .errors import FactorizationError, RangeError
from .orders import (
    UnitGroupStructure,
    count_exact_order,
    count_order_dividing,
    multiplicative_order,
    order_count_bound_holds,
    order_star,
    unit_group_structure,
)
from .stats import (
    HCutoff,
    MomentReport,
    default_cutoff,
    f_ell_exceed_fraction,
    h_prime_coeffs,
    h_prime_partial_sum,
    moments,
    normal_order_ratio,
    pi_progression,
    reciprocal_prime_sum,
    small_prime_weight,
    small_prime_weight_coeffs,
    small_prime_weight_depth,
)
from .sweep import (
    SweepConfig,
    SweepRecord,
    SweepRun,
    exception_density,
    sweep,
    write_csv,
    write_jsonl,
)

__version__ = "0.1.0"
