"""Certified dynamics of backward-shift operators on l-infinity.

Sequences are modelled exactly as a finite head plus quasi-geometric tail
terms, so preimages, kernels and mixing chains of ``I + lam B``, ``f(B)``
and related operators can be computed and verified with certified norms.
"""

from .analytic import (
    HypothesisError,
    PipelineParams,
    analytic_mixing_chain,
    choose_params,
    corollary_rescale,
    deflate_and_delta,
    disk_zeros,
    hypothesis_check,
)
from .obstructions import (
    amix_membership,
    circle_eigenvector,
    min_norm_lower_bound,
    range_witness,
    resolvent_solve,
    spectral_circle_distance,
)
from .product import ProductOperator, merge, product_apply, product_chain, separated_family, split
from .seqcore import (
    CertifiedInterval,
    GeomSequence,
    GeomTerm,
    add,
    basis,
    constant,
    in_c0,
    quotient_seminorm,
    scale,
    sub,
    sup_norm,
    zero,
)
from .solvers import (
    MixingCertificate,
    RegimeError,
    bounded_preimage,
    factored_preimage,
    fill_chain,
    kernel_vector,
    mixing_chain,
    preimage,
    transport_certificate,
    verify_certificate,
)
from .symcalc import (
    CertificationError,
    OperatorSymbol,
    apply_shift,
    apply_symbol,
    certify_circle,
    polynomial,
    reciprocal_power,
    symbol_multiply,
    symbol_opnorm,
    symbol_power,
    symbol_reciprocal,
)

__version__ = "0.1.0"
