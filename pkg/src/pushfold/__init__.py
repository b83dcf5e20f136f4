"""Pushforward densities of piecewise strictly monotone maps.

Given a random input X on [alpha, beta] and a continuous map g that is
strictly monotone between finitely many interior extrema, this package
computes the density of Y = g(X) without sampling: the sampled graph of
g is split into monotone branches, unfolded into a single increasing
map whose piecewise-linear inverse exists globally, and the output
density is assembled per interval between critical values by summing
the covering branches' contributions.  A Monte Carlo histogram baseline
and comparison metrics are included for validation.
"""

from .density import (
    DensityCurve,
    DensitySpec,
    SinPlusTwo,
    TableDensity,
    Uniform,
    build_density_spec,
    curve_mass,
    pushforward_density,
    simpson_integral,
)
from .errors import (
    BranchError,
    ConfigError,
    DegenerateInputError,
    DivergenceError,
    RangeError,
    TableConstructionError,
    UnfoldError,
)
from .maps import (
    Duffing,
    GridSpec,
    Logistic,
    MapDefinition,
    Oscillator,
    Pendulum,
    SampledMap,
    TableMap,
    analytic_derivative,
    eval_map,
    integrate_ivp,
    logistic_iterate,
    oscillator_map,
    sample_map,
    table_from_csv,
)
from .oracle import (
    ComparisonMetrics,
    Histogram,
    InverseCdfSampler,
    McConfig,
    compare,
    mc_density,
)
from .partition import (
    BoundaryClassification,
    LayerTable,
    MonotonePartition,
    build_layer_table,
    detect_extrema,
    index_set,
    layer_membership,
    transition_check,
    u_of_y,
)
from .unfold import UnfoldedMap, build_unfolded, eta_derivative, eta_eval

__version__ = "0.1.0"
