"""Lorentz boosts along x and the matching spinor transformation."""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from .spinor_algebra import Mode, gamma_matrices


def lorentz_boost(chi: float, mode=Mode.D1) -> np.ndarray:
    """Boost matrix along x with (1, 0, ...) -> (cosh chi, sinh chi, 0, ...)."""
    mode = Mode.parse(mode)
    lam = np.eye(mode.dim)
    ch, sh = math.cosh(chi), math.sinh(chi)
    lam[0, 0] = lam[1, 1] = ch
    lam[0, 1] = lam[1, 0] = sh
    return lam


def spinor_boost(chi: float, mode=Mode.D1) -> np.ndarray:
    """S(chi) = exp((chi/2) gamma^0 gamma^1), so that psibar' gamma^mu psi' = Lambda^mu_nu psibar gamma^nu psi."""
    g = gamma_matrices(mode)
    return scipy.linalg.expm(0.5 * chi * (g[0] @ g[1]))


def boost_events(events, chi: float, mode=Mode.D1) -> np.ndarray:
    events = np.atleast_2d(np.asarray(events, dtype=float))
    return events @ lorentz_boost(chi, mode).T
