"""Scalar belief propagation for scatterer-measurement association.

Messages run between the scatterer-oriented association variables ``a_k``
and the measurement-oriented variables ``b_m``. Because the pairwise
consistency factor takes only two values, every message is carried as a
single ratio: ``zeta[k, m]`` is the ``b_m = k`` entry of the message from
``a_k`` to ``b_m`` relative to its other entries, and ``nu[m, k]`` is the
``a_k = m`` entry of the message from ``b_m`` to ``a_k``.
"""

from dataclasses import dataclass
from typing import Final

import numpy as np
import structlog
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]

log = structlog.get_logger(__name__)

ORACLE_MAX_SIZE: Final[int] = 8
_EPS: Final[float] = float(np.finfo(float).eps)


class AssociationInputError(ValueError):
    """Raised for malformed association inputs or oversized oracle queries."""


@dataclass(frozen=True)
class AssocInput:
    """Single-variable messages entering the association loop.

    Attributes:
        beta: ``(K, M+1)`` messages from the legacy scatterers; column 0 is
            the missed-detection entry
        xi0: ``(M,)`` "not claimed by a legacy scatterer" entries of the
            messages from the new-scatterer side; all other entries are 1
    """

    beta: FloatArray
    xi0: FloatArray

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta, dtype=np.float64)
        xi0 = np.asarray(self.xi0, dtype=np.float64).reshape(-1)
        if beta.ndim != 2:
            raise AssociationInputError(f"beta must be 2-D, got shape {beta.shape}")
        if beta.shape[1] != xi0.size + 1:
            raise AssociationInputError(
                f"beta has {beta.shape[1]} columns, expected M+1 = {xi0.size + 1}"
            )
        for name, arr in (("beta", beta), ("xi0", xi0)):
            if not np.all(np.isfinite(arr)):
                raise AssociationInputError(f"{name} contains NaN or infinite entries")
            if np.any(arr < 0.0):
                raise AssociationInputError(f"{name} contains negative entries")
        if beta.shape[0] and not np.all(beta.max(axis=1) > 0.0):
            raise AssociationInputError("every beta row needs a positive entry")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "xi0", xi0)

    @property
    def num_scatterers(self) -> int:
        return int(self.beta.shape[0])

    @property
    def num_measurements(self) -> int:
        return int(self.xi0.size)


@dataclass(frozen=True)
class AssocOutput:
    """Extrinsic messages leaving the association loop.

    Attributes:
        eta: ``(K, M+1)`` message products back to each ``a_k``
        varsigma: ``(M, K+1)`` message products back to each ``b_m``
        iterations_used: Number of message-passing iterations run
    """

    eta: FloatArray
    varsigma: FloatArray
    iterations_used: int


def run_association(inp: AssocInput, max_iter: int = 1000, tol: float = 1e-5) -> AssocOutput:
    """Iterate the association messages until the normalized ``nu`` settle.

    The loop starts from unit ``zeta`` messages and stops once the largest
    change of any normalized ``nu`` entry drops below ``tol`` or after
    ``max_iter`` iterations.

    Args:
        inp: Incoming ``beta`` and ``xi`` messages
        max_iter: Iteration cap
        tol: Convergence tolerance

    Returns:
        Outgoing messages. With no scatterers or no measurements the loop is
        skipped and all-ones messages of the matching shape are returned.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be positive, got {max_iter}")
    n_scat, n_meas = inp.num_scatterers, inp.num_measurements
    if n_scat == 0 or n_meas == 0:
        return AssocOutput(
            eta=np.ones((n_scat, n_meas + 1)),
            varsigma=np.ones((n_meas, n_scat + 1)),
            iterations_used=0,
        )

    beta0 = inp.beta[:, :1]
    beta_m = inp.beta[:, 1:]
    zeta = np.ones((n_scat, n_meas))
    nu_prev: FloatArray | None = None
    iterations = 0

    for iterations in range(1, max_iter + 1):
        col = inp.xi0[:, None] + zeta.sum(axis=0)[:, None] - zeta.T
        nu = 1.0 / np.maximum(col, _EPS)

        prod = beta_m * nu.T
        row = beta0 + prod.sum(axis=1, keepdims=True) - prod
        zeta = beta_m / np.maximum(row, _EPS)

        # Normalized nu takes two values per message: nu/(nu+M) and 1/(nu+M).
        nu_norm = np.stack([nu / (nu + n_meas), 1.0 / (nu + n_meas)])
        if nu_prev is not None and np.max(np.abs(nu_norm - nu_prev)) < tol:
            break
        nu_prev = nu_norm
    else:
        log.warning("association_not_converged", max_iter=max_iter, K=n_scat, M=n_meas)

    eta = np.ones((n_scat, n_meas + 1))
    eta[:, 1:] = nu.T
    varsigma = np.ones((n_meas, n_scat + 1))
    varsigma[:, 1:] = zeta.T
    log.debug("association_done", iterations=iterations, K=n_scat, M=n_meas)
    return AssocOutput(eta=eta, varsigma=varsigma, iterations_used=iterations)


def association_marginals(inp: AssocInput, out: AssocOutput) -> tuple[FloatArray, FloatArray]:
    """Normalized beliefs of every ``a_k`` and ``b_m``.

    Returns:
        ``(K, M+1)`` and ``(M, K+1)`` tables whose rows sum to one.
    """
    pa = inp.beta * out.eta
    xi = np.ones((inp.num_measurements, inp.num_scatterers + 1))
    xi[:, 0] = inp.xi0
    pb = xi * out.varsigma
    return _normalize_rows(pa), _normalize_rows(pb)


def exact_association_marginals(inp: AssocInput) -> tuple[FloatArray, FloatArray]:
    """Marginals by enumerating every consistent joint association.

    Raises:
        AssociationInputError: If K or M exceeds the enumeration limit, or no
            consistent association has positive weight.
    """
    n_scat, n_meas = inp.num_scatterers, inp.num_measurements
    if n_scat > ORACLE_MAX_SIZE or n_meas > ORACLE_MAX_SIZE:
        raise AssociationInputError(
            f"enumeration limited to K, M <= {ORACLE_MAX_SIZE}, got K={n_scat}, M={n_meas}"
        )
    pa = np.zeros((n_scat, n_meas + 1))
    pb = np.zeros((n_meas, n_scat + 1))
    if n_scat == 0:
        pb[:, 0] = 1.0
        return pa, pb
    assignment = [0] * n_scat

    def visit(k: int, used: frozenset[int], weight: float) -> None:
        if weight == 0.0:
            return
        if k == n_scat:
            free = [m for m in range(1, n_meas + 1) if m not in used]
            total = weight * float(np.prod(inp.xi0[np.array(free, dtype=int) - 1]))
            for kk, a in enumerate(assignment):
                pa[kk, a] += total
                if a:
                    pb[a - 1, kk + 1] += total
            for m in free:
                pb[m - 1, 0] += total
            return
        for a in range(n_meas + 1):
            if a and a in used:
                continue
            assignment[k] = a
            visit(k + 1, used | {a} if a else used, weight * inp.beta[k, a])

    visit(0, frozenset(), 1.0)

    total_weight = pa[0].sum()
    if total_weight <= 0.0:
        raise AssociationInputError("no consistent association has positive weight")
    return pa / total_weight, pb / total_weight


def _normalize_rows(table: FloatArray) -> FloatArray:
    sums = table.sum(axis=1, keepdims=True)
    return np.divide(table, sums, out=np.zeros_like(table), where=sums > 0)
