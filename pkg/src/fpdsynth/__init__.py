"""Coupled-resonator filtering power divider synthesis and verification."""
from .circuit import coupling_to_netlist, parse_netlist, serialize_netlist, sparams_mna
from .engine import (
    CouplingNetwork,
    Port,
    SParamSweep,
    band_edges,
    build_fpd_network,
    lowpass_map,
    sparameters,
)
from .extraction import TuneTargets, k_from_split_peaks, qe_from_group_delay, tune
from .metrics import MetricsReport, report_metrics
from .microstrip import SubstrateSpec, guided_wavelength, microstrip_analyze, microstrip_synthesize
from .prototype import (
    CouplingPlan,
    DividerSpec,
    GValues,
    chebyshev_gvalues,
    coupling_plan,
    plan_for,
    ripple_from_return_loss,
)
from .touchstone import read_touchstone, write_touchstone

__version__ = "0.1.0"
