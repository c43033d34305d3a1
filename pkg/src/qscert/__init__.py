"""Quantitative convergence-to-quasi-stationarity certificates for finite
absorbing Markov chains: principal eigendata, ergodic transforms,
functional-inequality constants, explicit total-variation bound curves, and
exact/Monte-Carlo validation of all of it.
"""

from .core import (
    ContinuousAbsorbingChain,
    DiscreteAbsorbingChain,
    StateSpace,
    build_continuous,
    build_discrete,
    model_hash,
    parse_model,
    probability_vector,
    serialize_model,
)
from .spectral import (
    DirichletSpectrum,
    PerronData,
    check_reversible,
    dirichlet_spectrum,
    embed_discrete,
    invariant_measure,
    perron,
)
from .doob import DoobChain, doob_continuous, doob_discrete, doob_invariant, doob_transform, symmetrize
from .evolution import (
    EvolutionReport,
    conditioned_law,
    distances,
    doob_law,
    evolution_report,
    survival_curve,
    worst_case_tv,
)
from .funineq import (
    FunctionalConstants,
    PathFamily,
    base_gap,
    compare_gap,
    default_paths,
    dirichlet_form,
    functional_constants,
    lsi_constant,
    path_bound,
    spectral_gap,
)
from .bounds import (
    BoundCurve,
    lsi_curve,
    median_envelope,
    mixing_time,
    probabilist_tv,
    product_curves,
    thm1_envelope,
    thm2_curve,
    thm3_curve,
)
from .montecarlo import AbsorptionSample, SimConfig, estimate_conditioned, feynman_kac, simulate

__version__ = "0.1.0"
