"""Two-mode Gaussian covariance matrices in standard form.

Conventions
-----------
Quadrature ordering is ``(q1, p1, q2, p2)`` and the covariance matrix is the
symmetrised, mean-subtracted second-moment matrix scaled so that the vacuum is
the identity (``a_eff = (q + i p) / sqrt(2)`` with vacuum variance 1). With this
normalisation a thermal mode of mean occupation ``n`` has variance ``1 + 2 n``
and the Renyi-2 entropy of a Gaussian state is ``0.5 * ln det(sigma)``.

All entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import DomainError, NumericError

PHYSICALITY_TOL = 1e-9
STANDARD_FORM_TOL = 1e-12


@dataclass(frozen=True)
class TwoModeCM:
    """Standard-form two-mode covariance matrix.

    The full 4x4 matrix is ``[[a,0,c,0],[0,a,0,d],[c,0,b,0],[0,d,0,b]]``.
    """

    a: float
    b: float
    c: float = 0.0
    d: float = 0.0

    def matrix(self) -> np.ndarray:
        a, b, c, d = self.a, self.b, self.c, self.d
        return np.array(
            [[a, 0.0, c, 0.0], [0.0, a, 0.0, d], [c, 0.0, b, 0.0], [0.0, d, 0.0, b]],
            dtype=float,
        )

    @classmethod
    def from_matrix(cls, sigma, tol: float = STANDARD_FORM_TOL) -> "TwoModeCM":
        """Build from a 4x4 array, rejecting anything not already in standard form."""
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != (4, 4):
            raise DomainError(f"expected a 4x4 matrix, got shape {sigma.shape}")
        if not np.all(np.isfinite(sigma)):
            raise DomainError("matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(sigma))))
        if np.max(np.abs(sigma - sigma.T)) > tol * scale:
            raise DomainError("matrix is not symmetric")
        a, b, c, d = sigma[0, 0], sigma[2, 2], sigma[0, 2], sigma[1, 3]
        candidate = cls(float(a), float(b), float(c), float(d))
        if np.max(np.abs(candidate.matrix() - sigma)) > tol * scale:
            raise DomainError("matrix is not in two-mode standard form")
        return candidate

    @property
    def det(self) -> float:
        ab = self.a * self.b
        return (ab - self.c**2) * (ab - self.d**2)


class SymplecticSpectrum(NamedTuple):
    nu_minus: float
    nu_plus: float


def physicality_violation(cm: TwoModeCM, tol: float = PHYSICALITY_TOL) -> Optional[str]:
    """Return a short reason code if ``cm`` is not a physical state, else ``None``.

    Codes: ``"non-finite"``, ``"not-positive-definite"``, ``"uncertainty"``.
    """
    vals = (cm.a, cm.b, cm.c, cm.d)
    if not all(math.isfinite(v) for v in vals):
        return "non-finite"
    ab = cm.a * cm.b
    if cm.a <= 0 or cm.b <= 0 or ab - cm.c**2 <= 0 or ab - cm.d**2 <= 0:
        return "not-positive-definite"
    try:
        nu_minus = symplectic_eigenvalues(cm).nu_minus
    except NumericError:
        return "uncertainty"
    if nu_minus < 1.0 - tol:
        return "uncertainty"
    return None


def is_physical(cm: TwoModeCM, tol: float = PHYSICALITY_TOL) -> bool:
    """True iff the smallest symplectic eigenvalue is at least ``1 - tol``."""
    return physicality_violation(cm, tol) is None


def _require_physical(cm: TwoModeCM) -> None:
    reason = physicality_violation(cm)
    if reason is not None:
        raise DomainError(f"covariance matrix {cm} is not physical: {reason}")


def symplectic_eigenvalues(cm: TwoModeCM) -> SymplecticSpectrum:
    """Symplectic spectrum from the two-mode closed form.

    ``nu^2 = (D +- sqrt(D^2 - 4 det)) / 2`` with ``D = a^2 + b^2 + 2 c d``.
    The smaller root is evaluated as ``2 det / (D + sqrt(...))`` so that the
    product of the two eigenvalues reproduces ``det`` without cancellation.
    """
    a, b, c, d = cm.a, cm.b, cm.c, cm.d
    ab = a * b
    if a <= 0 or b <= 0 or ab - c**2 <= 0 or ab - d**2 <= 0:
        raise NumericError(f"{cm} is not positive definite")
    delta = a * a + b * b + 2.0 * c * d
    det = (ab - c * c) * (ab - d * d)
    disc = delta * delta - 4.0 * det
    if disc < 0:
        if disc < -1e-12 * delta * delta:
            raise NumericError(f"negative discriminant {disc!r} for {cm}")
        disc = 0.0
    root = math.sqrt(disc)
    nu_plus_sq = 0.5 * (delta + root)
    nu_minus_sq = det / nu_plus_sq
    return SymplecticSpectrum(math.sqrt(nu_minus_sq), math.sqrt(nu_plus_sq))


def renyi2_entropy(state: Union[TwoModeCM, float]) -> float:
    """Renyi-2 entropy ``0.5 ln det(sigma)`` of a one- or two-mode Gaussian state.

    A plain number is read as the variance ``v`` of a single mode, for which
    ``det = v**2``.
    """
    if isinstance(state, TwoModeCM):
        _require_physical(state)
        ab = state.a * state.b
        return (
            math.log(state.a)
            + math.log(state.b)
            + 0.5 * math.log1p(-state.c**2 / ab)
            + 0.5 * math.log1p(-state.d**2 / ab)
        )
    v = float(state)
    if not math.isfinite(v) or v <= 0:
        raise DomainError(f"single-mode variance {v!r} is not positive")
    if v < 1.0 - PHYSICALITY_TOL:
        raise DomainError(f"single-mode variance {v!r} is below vacuum noise: uncertainty")
    return math.log(v)


def mutual_info_renyi2(cm: TwoModeCM) -> float:
    """Renyi-2 mutual information ``0.5 ln[a^2 b^2 / ((ab - c^2)(ab - d^2))]``."""
    _require_physical(cm)
    if cm.c == 0 and cm.d == 0:
        return 0.0
    ab = cm.a * cm.b
    return -0.5 * (math.log1p(-cm.c**2 / ab) + math.log1p(-cm.d**2 / ab))


def two_mode_squeezed_vacuum(r: float) -> TwoModeCM:
    """Pure two-mode squeezed vacuum with squeezing parameter ``r``."""
    ch, sh = math.cosh(2 * r), math.sinh(2 * r)
    return TwoModeCM(ch, ch, sh, -sh)
