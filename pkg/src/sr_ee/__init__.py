"""Energy-efficiency region tools for a RIS-assisted symbiotic-radio link.

Library layering, bottom up: numerics (special functions, RNG streams),
channel (geometry, Rician links), metrics (rates, EE), individual
(single-operator maximizers), asymptotics (closed forms + validators),
convex (log-barrier subproblem solver), pareto (boundary search), config /
experiments / cli (user surface). Hot kernels live in _kernels with a
compiled extension and a pure NumPy fallback chosen at import.
"""

from ._kernels import BACKEND
from .channel import (ChannelConfig, ChannelRealization, DerivedChannel,
                      Geometry, PathGains, derive_normalized, path_gains,
                      sample_channels)
from .config import CODE_VERSION, ConfigError, RunConfig, load_config
from .convex import ConvexSubproblem, SolveInfo, SubproblemInfeasible, solve_convex
from .individual import (DegenerateChannelError, IndividualResult, max_ee_pt,
                         max_ee_ris, max_rate_pt)
from .metrics import (BeamformingSolution, EEPair, SampleSet, SystemParams,
                      db_to_linear, dbm_to_watt)
from .pareto import (Anchors, InfeasibleEta, ParetoPoint, ParetoQuery,
                     pareto_boundary, pareto_point)

__version__ = CODE_VERSION

__all__ = [
    "BACKEND", "ChannelConfig", "ChannelRealization", "DerivedChannel",
    "Geometry", "PathGains", "derive_normalized", "path_gains",
    "sample_channels", "CODE_VERSION", "ConfigError", "RunConfig",
    "load_config", "ConvexSubproblem", "SolveInfo", "SubproblemInfeasible",
    "solve_convex", "DegenerateChannelError", "IndividualResult",
    "max_ee_pt", "max_ee_ris", "max_rate_pt", "BeamformingSolution",
    "EEPair", "SampleSet", "SystemParams", "db_to_linear", "dbm_to_watt",
    "Anchors", "InfeasibleEta", "ParetoPoint", "ParetoQuery",
    "pareto_boundary", "pareto_point", "__version__",
]
