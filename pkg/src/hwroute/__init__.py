"""Small-world highway graph models and decentralized greedy routing.

Generators for the Kleinberg baseline, Kleinberg Highway, Randomized Highway
and Windowed NPA models over torus grids and road networks, their greedy
routing algorithms, and numeric validation of the supporting lemmas.
"""

from .errors import (GenerationError, HwrouteError, InputError, InvariantError,
                     ParameterError, RoutingPolicyError)
from .metric import GridMetric, GridTopology, ball_nodes, lattice_distance, sphere_nodes
from .models import (GraphInstance, ModelParams, generate, generate_kh,
                     generate_kleinberg, generate_on_metric, generate_rh,
                     generate_wnpa)
from .routing import (RouteTrace, RoutingPolicy, greedy_route, route, route_kh,
                      route_rh, route_wnpa)
from .experiments import (ComparisonResult, StatSummary, SweepCurve,
                          compare_models, run_trials, sample_pairs, sweep_k)
from .roadnet import (RoadGraph, RoadMetric, load_road_network,
                      single_source_distances, synthesize_road_network)

__version__ = "0.1.0"
