"""Lindblad exciton-transport simulation with quantum-correlation analytics.

The package models an N-site excitation-hopping network with local
dissipation, local dephasing and an irreversible sink, all inside the
zero/one-excitation subspace.  On top of the propagated density matrices it
evaluates bipartite correlation measures (negativity, quantum discord),
site-vs-rest monogamy scores, bipartition collections, dominant
energy-transfer routes, and feature-based site groupings.

Hot kernels run in a compiled extension when it is built; a pure-numpy
fallback with identical semantics is selected automatically otherwise (or
when EXCITONKIT_PURE_PYTHON=1).
"""

from ._backend import backend_name
from .analytics import (CorrelationSeries, DegenerateGroupingError,
                        GroupReport, RouteReport, RunBundle, classify_sites,
                        collection, collection_series, detect_route,
                        monogamy_score, pair_value, series, site_features,
                        site_vs_rest)
from .correlations import (MEASURES, CorrelationValue, MeasurementBasis,
                           classical_correlation, discord,
                           discord_site_vs_rest, entropy, mutual_information,
                           negativity, negativity_site_vs_rest)
from .evolution import (IntegrationAbort, Liouvillian, Trajectory,
                        build_liouvillian, propagate,
                        sink_population_integral, write_populations_csv)
from .network import (ConfigError, NetworkSpec, PRESETS, build_fcn, build_fmo,
                      get_preset, network_from_config, network_to_config)
from .states import (StateError, assert_valid_state, basis_state, embed_full,
                     mixed_state, partial_trace, random_subspace_state,
                     reduce_site, reduce_two_site, trace_out_sink)
from .units import CM_TO_RAD_PER_PS, convert_rate, rate_from_per_ps

__version__ = "0.1.0"

__all__ = [
    "CM_TO_RAD_PER_PS", "ConfigError", "CorrelationSeries",
    "CorrelationValue", "DegenerateGroupingError", "GroupReport",
    "IntegrationAbort", "Liouvillian", "MEASURES", "MeasurementBasis",
    "NetworkSpec", "PRESETS", "RouteReport", "RunBundle", "StateError",
    "Trajectory", "assert_valid_state", "backend_name", "basis_state",
    "build_fcn", "build_fmo", "build_liouvillian", "classical_correlation",
    "classify_sites", "collection", "collection_series", "convert_rate",
    "detect_route", "discord", "discord_site_vs_rest", "embed_full",
    "entropy", "get_preset", "mixed_state", "monogamy_score",
    "mutual_information", "negativity", "negativity_site_vs_rest",
    "pair_value", "partial_trace", "propagate", "random_subspace_state",
    "rate_from_per_ps", "reduce_site", "reduce_two_site", "series",
    "site_features", "site_vs_rest", "sink_population_integral",
    "trace_out_sink", "network_from_config", "network_to_config",
    "write_populations_csv",
]
