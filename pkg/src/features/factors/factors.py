"""Pointwise factors of the tracking posterior.

Measurement likelihoods, the clutter density, the pseudo-likelihood factors
``g`` (legacy scatterers) and ``h`` (new scatterers), the association
consistency indicator ``psi`` and the random-walk transition samplers.

Array forms work on particle clouds of shape ``(S, 2)`` and return log
values where products over many factors follow.
"""

import numpy as np
from numpy.typing import NDArray
from scipy.stats import norm

from config.settings import ModelParams
from features.geometry import (
    DirectMeasurement,
    Pose,
    Position,
    ScatterMeasurement,
    aoas,
    relative_distances,
)
from features.scenario import MeasurementFrame

FloatArray = NDArray[np.float64]


# =============================================================================
# LIKELIHOODS
# =============================================================================


def scatter_log_likelihoods(
    z: FloatArray, tx: FloatArray, scat: FloatArray, rx: Pose, p: ModelParams
) -> FloatArray:
    """Log-likelihood of every measurement for every (tx, scatterer) particle pair.

    Args:
        z: ``(M, 2)`` measurements as (rel_distance, aoa)
        tx: ``(S, 2)`` or ``(2,)`` transmitter positions
        scat: ``(S, 2)`` scatterer positions
        rx: Receiver pose
        p: Model parameters

    Returns:
        ``(M, S)`` array; ``-inf`` where a scatterer sits on the receiver.
    """
    z = np.atleast_2d(np.asarray(z, dtype=np.float64))
    rx_xy = rx.position.as_array()
    d_pred = relative_distances(tx, scat, rx_xy)
    theta_pred = aoas(scat, rx)
    ll = norm.logpdf(z[:, 0, None], loc=d_pred, scale=p.sigma_d_lik) + norm.logpdf(
        z[:, 1, None], loc=np.nan_to_num(theta_pred), scale=p.sigma_theta_lik
    )
    return np.where(np.isnan(theta_pred), -np.inf, ll)


def direct_log_likelihoods(
    z0: float, tx: FloatArray, rx: Pose, p: ModelParams
) -> FloatArray:
    """Log-likelihood of the direct-path AOA for each transmitter particle."""
    theta_pred = aoas(tx, rx)
    ll = norm.logpdf(z0, loc=np.nan_to_num(theta_pred), scale=p.sigma_theta_lik)
    return np.where(np.isnan(theta_pred), -np.inf, ll)


def likelihood_scatter(
    z: ScatterMeasurement, tx: Position, scat: Position, rx: Pose, p: ModelParams
) -> float:
    """Density of a scattered-path measurement given tx and scatterer positions.

    Zero when the scatterer coincides with the receiver.
    """
    ll = scatter_log_likelihoods(
        np.array([[z.rel_distance, z.aoa]]), tx.as_array(), scat.as_array()[None, :], rx, p
    )
    return float(np.exp(ll[0, 0]))


def likelihood_direct(
    z0: DirectMeasurement, tx: Position, rx: Pose, p: ModelParams
) -> float:
    """Density of the direct-path AOA; zero when tx coincides with the receiver."""
    return float(np.exp(direct_log_likelihoods(z0.aoa, tx.as_array()[None, :], rx, p)[0]))


def fa_density(z: ScatterMeasurement, p: ModelParams) -> float:
    """Uniform false-alarm density over the clutter box, zero outside it."""
    d_lo, d_hi = p.fa_d_range
    t_lo, t_hi = p.fa_theta_range
    if d_lo <= z.rel_distance <= d_hi and t_lo <= z.aoa <= t_hi:
        return 1.0 / ((d_hi - d_lo) * (t_hi - t_lo))
    return 0.0


def clutter_intensity(p: ModelParams) -> float:
    """``mu_fa`` times the in-box false-alarm density.

    Used as the denominator of every likelihood ratio. Measurements that fall
    outside the clutter box are scored against the same constant so their
    ratio stays finite.
    """
    d_lo, d_hi = p.fa_d_range
    t_lo, t_hi = p.fa_theta_range
    return p.mu_fa / ((d_hi - d_lo) * (t_hi - t_lo))


# =============================================================================
# FACTORS
# =============================================================================


def detection_factors(
    z: FloatArray, tx: FloatArray, scat: FloatArray, rx: Pose, p: ModelParams
) -> FloatArray:
    """``g(tx_s, x_s, r=1, a)`` for every particle pair and every ``a``.

    Returns:
        ``(S, M+1)`` array. Column 0 is the missed-detection value
        ``1 - p_d``; column ``m`` is ``p_d f(z_m | tx_s, x_s) / (mu_fa f_FA)``.
    """
    z = np.asarray(z, dtype=np.float64).reshape(-1, 2)
    n = np.shape(scat)[0]
    out = np.empty((n, len(z) + 1))
    out[:, 0] = 1.0 - p.p_detect
    if len(z):
        ll = scatter_log_likelihoods(z, tx, scat, rx, p)
        out[:, 1:] = (p.p_detect / clutter_intensity(p)) * np.exp(ll).T
    return out


def g_factor(
    tx: Position,
    scat: Position,
    r: int,
    a: int,
    frame: MeasurementFrame,
    rx: Pose,
    p: ModelParams,
) -> float:
    """Pseudo-likelihood factor of a legacy scatterer.

    Args:
        tx: Transmitter position
        scat: Scatterer position
        r: Existence indicator (0 or 1)
        a: Associated measurement index, 0 for a missed detection
        frame: Current measurements
        rx: Receiver pose
        p: Model parameters

    Raises:
        ValueError: If ``a`` is outside ``0..M`` or ``r`` is not binary.
    """
    if r not in (0, 1):
        raise ValueError(f"existence indicator must be 0 or 1, got {r}")
    if not 0 <= a <= frame.num_measurements:
        raise ValueError(f"association {a} outside 0..{frame.num_measurements}")
    if r == 0:
        return 1.0 if a == 0 else 0.0
    if a == 0:
        return 1.0 - p.p_detect
    z = frame.scatter[a - 1]
    return p.p_detect * likelihood_scatter(z, tx, scat, rx, p) / clutter_intensity(p)


def h_factor_weights(
    z_m: FloatArray,
    tx: FloatArray,
    new_scat: FloatArray,
    rx: Pose,
    mu_new: float,
    p: ModelParams,
) -> FloatArray:
    """Vectorized :func:`h_factor_weight` over ``(S, 2)`` particle pairs."""
    ll = scatter_log_likelihoods(np.asarray(z_m).reshape(1, 2), tx, new_scat, rx, p)[0]
    return (mu_new / clutter_intensity(p)) * np.exp(ll)


def h_factor_weight(
    tx: Position,
    new_scat: Position,
    z_m: ScatterMeasurement,
    rx: Pose,
    mu_new: float,
    p: ModelParams,
) -> float:
    """Weight of a new scatterer hypothesized from ``z_m`` (existing, unclaimed branch).

    The new-scatterer prior is realized by the birth proposal and therefore
    omitted here.
    """
    w = h_factor_weights(
        np.array([z_m.rel_distance, z_m.aoa]),
        tx.as_array(),
        new_scat.as_array()[None, :],
        rx,
        mu_new,
        p,
    )
    return float(w[0])


def psi(a: int, m: int, b: int, k: int) -> int:
    """Consistency of scatterer ``k`` choosing ``a`` and measurement ``m`` choosing ``b``."""
    if (a == m) != (b == k):
        return 0
    return 1


# =============================================================================
# TRANSITIONS
# =============================================================================


def random_walk(xy: FloatArray, sigma: float, rng: np.random.Generator) -> FloatArray:
    """Gaussian random-walk step applied to an ``(..., 2)`` array."""
    xy = np.asarray(xy, dtype=np.float64)
    if sigma == 0.0:
        return xy.copy()
    return xy + rng.normal(0.0, sigma, size=xy.shape)


def transition_sample_ps(prev: Position, p: ModelParams, rng: np.random.Generator) -> Position:
    """Draw a scatterer position from the random-walk transition."""
    return Position.from_array(random_walk(prev.as_array(), p.sigma_ps_walk, rng))


def transition_sample_tx(prev: Position, p: ModelParams, rng: np.random.Generator) -> Position:
    """Draw a transmitter position from the random-walk transition."""
    return Position.from_array(random_walk(prev.as_array(), p.sigma_tx_walk, rng))
