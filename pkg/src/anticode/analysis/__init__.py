from .measure import ProductMeasure, apply_axis, axis_mean, contract, marginalize
from .realfn import RealFn
from .chains import (MarkovChain, chain_correlation, chain_correlation_mc, product_chain_apply,
                     product_measure)
from .efron_stein import (ESDecomposition, conditional_expectation, efron_stein, es_component,
                          laplacian, laplacian_combinatorial, laplacian_signed_sum, noise_apply,
                          noise_apply_es, noise_stability, noise_stability_es, recompose)
from .inequalities import (changenoise_check, contraction_check, gap_lemma_report,
                           gap_lower_bound_check, global_laplacian_bound_check,
                           global_stab_check, hoffman_bound, hoffman_check,
                           hypercontract_check, op_to_stab_check, restriction_commutes_check)
