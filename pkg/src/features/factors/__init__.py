"""
Factors package.

Measurement likelihoods, clutter density, the legacy/new scatterer
pseudo-likelihood factors, the association consistency indicator and the
random-walk transitions.
"""

from .factors import (
    clutter_intensity,
    detection_factors,
    direct_log_likelihoods,
    fa_density,
    g_factor,
    h_factor_weight,
    h_factor_weights,
    likelihood_direct,
    likelihood_scatter,
    psi,
    random_walk,
    scatter_log_likelihoods,
    transition_sample_ps,
    transition_sample_tx,
)

__all__ = [
    "clutter_intensity",
    "detection_factors",
    "direct_log_likelihoods",
    "fa_density",
    "g_factor",
    "h_factor_weight",
    "h_factor_weights",
    "likelihood_direct",
    "likelihood_scatter",
    "psi",
    "random_walk",
    "scatter_log_likelihoods",
    "transition_sample_ps",
    "transition_sample_tx",
]
