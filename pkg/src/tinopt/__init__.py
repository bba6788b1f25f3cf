"""Treating interference as noise: optimality checks, GDoF regions, gap
certificates, and cellular Monte-Carlo experiments for K-user
interference networks."""

__version__ = "0.1.0"

from .channel_model import (
    SILENT,
    ChannelMatrix,
    ConditionReport,
    PowerExponents,
    channel_from_dict,
    check_tin_condition,
    from_link_budget,
    load_channel,
    polyhedral_tin_gdof,
    tin_gdof,
    transpose_channel,
)
from .potential_graph import (
    EPS_LENGTH,
    MembershipCertificate,
    PotentialGraph,
    build_graph,
    decide_membership,
    recover_power_allocation,
)
from .region import (
    LinearInequality,
    Polyhedron,
    RegionComponent,
    TinMembership,
    canonical_cycle,
    enumerate_cycles,
    general_tin_region,
    max_weighted_gdof,
    minimized,
    point_in_tin_region,
    polyhedral_region,
    polyhedron_from_dict,
    polyhedron_vertices,
)
from .capacity_gap import (
    CyclicBoundQuantities,
    FiniteSnrChannel,
    GapReport,
    cyclic_quantities,
    gap_certificate,
    gdof_limit_checks,
    rate_outer_bounds,
    tin_rates,
)
from .netsim import (
    ConditionEstimate,
    NetworkInstance,
    SimConfig,
    condition_probability,
    erceg_pathloss,
    sample_network,
    sweep,
    sweep_to_csv,
)

__all__ = [
    "SILENT",
    "ChannelMatrix",
    "ConditionReport",
    "PowerExponents",
    "channel_from_dict",
    "check_tin_condition",
    "from_link_budget",
    "load_channel",
    "polyhedral_tin_gdof",
    "tin_gdof",
    "transpose_channel",
    "EPS_LENGTH",
    "MembershipCertificate",
    "PotentialGraph",
    "build_graph",
    "decide_membership",
    "recover_power_allocation",
    "LinearInequality",
    "Polyhedron",
    "RegionComponent",
    "TinMembership",
    "canonical_cycle",
    "enumerate_cycles",
    "general_tin_region",
    "max_weighted_gdof",
    "minimized",
    "point_in_tin_region",
    "polyhedral_region",
    "polyhedron_from_dict",
    "polyhedron_vertices",
    "CyclicBoundQuantities",
    "FiniteSnrChannel",
    "GapReport",
    "cyclic_quantities",
    "gap_certificate",
    "gdof_limit_checks",
    "rate_outer_bounds",
    "tin_rates",
    "ConditionEstimate",
    "NetworkInstance",
    "SimConfig",
    "condition_probability",
    "erceg_pathloss",
    "sample_network",
    "sweep",
    "sweep_to_csv",
]
