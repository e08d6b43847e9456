"""Sneak-path-aware channel modelling and IRA code design for ReRAM crossbars."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"

from .channel import ChannelParams, SneakPathLLR, cell_llr, estimate_sp_rate, read_array
from .spstats import design_lambda, gaussian_model, sp_rate_mean, sp_rate_variance
from .capacity import LambdaChannel, capacity_approx, dispersion_approx, shannon_limit_sigma
from .bound import BoundQuery, ppv_bound
from .de import decoding_threshold, phi, phi_inv
from .ira import IraProfile, bp_decode, build_graph, encode

__all__ = [
    "ChannelParams", "SneakPathLLR", "cell_llr", "estimate_sp_rate", "read_array",
    "design_lambda", "gaussian_model", "sp_rate_mean", "sp_rate_variance",
    "LambdaChannel", "capacity_approx", "dispersion_approx", "shannon_limit_sigma",
    "BoundQuery", "ppv_bound", "decoding_threshold", "phi", "phi_inv",
    "IraProfile", "bp_decode", "build_graph", "encode",
]
