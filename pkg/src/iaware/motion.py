"""Nearly-constant-velocity dynamics for states ``[px, vx, py, vy]``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from ._validation import check_positive, check_state


@dataclass(frozen=True, eq=False)
class NCVParams:
    """Transition matrix ``F`` and process noise ``Q`` of the NCV model.

    ``chol`` is a lower-triangular factor with ``chol @ chol.T == Q``; it is
    the zero matrix when ``sigma_motion_sq`` is zero.
    """

    T: float
    sigma_motion_sq: float
    F: np.ndarray
    Q: np.ndarray
    chol: np.ndarray


def make_ncv(T: float = 1.0, sigma_motion_sq: float = 7.0) -> NCVParams:
    T = check_positive(T, "T")
    s2 = check_positive(sigma_motion_sq, "sigma_motion_sq", strict=False)
    A = np.array([[1.0, T], [0.0, 1.0]])
    B_unit = np.array([[T**3 / 3.0, T**2 / 2.0], [T**2 / 2.0, T]])
    F = block_diag(A, A)
    Q = s2 * block_diag(B_unit, B_unit)
    # B_unit is positive definite for T > 0, so only its factor is needed
    chol = np.sqrt(s2) * block_diag(*(2 * [np.linalg.cholesky(B_unit)]))
    for m in (F, Q, chol):
        m.setflags(write=False)
    return NCVParams(T=T, sigma_motion_sq=s2, F=F, Q=Q, chol=chol)


def noise_free_predict(state, params: NCVParams) -> np.ndarray:
    """``F @ x`` for a single state or each row of an (n, 4) array."""
    x = check_state(state)
    return x @ params.F.T


def sample_transition(state, params: NCVParams, rng: np.random.Generator) -> np.ndarray:
    """Draw ``F x + e`` with ``e ~ N(0, Q)``; rows of a 2-D input are drawn independently."""
    x = check_state(state)
    noise = rng.standard_normal(x.shape) @ params.chol.T
    return x @ params.F.T + noise
