"""Simple pricing mechanisms, empirical revenue maximization and exact
revenue oracles for buyers with independent item values."""

from .demand import Purchase, best_bundle, grand_bundle_choice
from .learners import (EXACT_GRID, EXHAUSTIVE_PRODUCT, HILL_CLIMB, BenchmarkRevenues, ErmResult,
                       GridTooLarge, RevenueEvaluator, SampleBoundQuery, erm_bundle_pricing,
                       erm_item_or_bundle, erm_item_pricing_additive, erm_item_pricing_general,
                       erm_multi_additive_pipeline, erm_reduced_item_pricing, erm_reduced_or_bundle,
                       erm_restricted, exact_brev_prev, grid_best_true_revenue, sample_bound,
                       true_revenue)
from .mechanisms import (AnonBundle, AnonItem, AuctionOutcome, IndBundle, IndItem, MechanismError,
                         ReducedItem, SecondPrice, SPReservesAnon, SPReservesInd, empirical_revenue,
                         rule_from_json, rule_to_json, run_reduced_item_pricing, run_second_price,
                         run_sequential_bundle_pricing, run_sequential_item_pricing,
                         run_sp_with_reserves)
from .oracles import FiniteTypeSpace, Menu, lp_optimal_revenue, menu_violation, verify_approx_factor
from .reductions import (RestrictedIndBundle, RestrictedIndItem, RestrictedMix, compute_beta, max_mech,
                         modify_bids, run_restricted_bundle_pricing, run_restricted_item_pricing)
from .shattering import (NOT_SHATTERED, SHATTERED, UNKNOWN, ShatterInstance, ShatterVerdict,
                         labeling_count, pd_lower_bound_search, shatter_check)
from .valuations import (Additive, BundleTable, BuyerDistribution, Constant, Discrete,
                         ProductDistribution, SampleSet, SubadditiveGenerator, Uniform, UnitDemand,
                         ValuationError, ValuationProfile, additive_dist, additive_profile,
                         bundle_value, draw_samples, sample_set, unit_demand_dist,
                         unit_demand_profile, validate_valuation)

__version__ = "0.1.0"
