"""Illumination scenarios and their effective two-mode covariance matrices.

A scenario describes one pixel pair: ``M`` source modes land on a reference
pixel and (after reflection from the object) on a signal pixel, which also
collects ``M_beta`` thermal bath modes. ``N`` and ``N_beta`` are *detected*
mean counts, so the per-mode source occupation is ``N / (eta M)`` and the
per-mode bath occupation is ``N_beta / (eta_beta M_beta)``.

Marginal naming
---------------
The element ``a = 1 + 2 eta mu1`` carries the full illumination with no bath,
so it is exposed as the *bright arm*; ``b`` mixes the reflected light with the
bath and is exposed as the *bath arm*. Mutual information is symmetric in the
two, so nothing downstream depends on which physical plane gets which label.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import DomainError, ParameterError
from .gaussian import TwoModeCM, is_physical, mutual_info_renyi2, physicality_violation

BALANCED_TAU = 0.5


class SourceKind(str, enum.Enum):
    TWB = "TWB"
    THB = "THB"


@dataclass(frozen=True)
class Scenario:
    source_kind: SourceKind
    N: float
    M: int
    N_beta: float
    M_beta: int
    eta: float
    eta_beta: float
    tau: float = BALANCED_TAU
    object_present: bool = True
    N_pix: int = 80

    def __post_init__(self):
        try:
            kind = SourceKind(self.source_kind)
        except ValueError:
            raise ParameterError(f"source_kind must be 'TWB' or 'THB', got {self.source_kind!r}") from None
        object.__setattr__(self, "source_kind", kind)
        for name in ("M", "M_beta", "N_pix"):
            value = getattr(self, name)
            if isinstance(value, bool) or not float(value).is_integer():
                raise ParameterError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        for name in ("N", "N_beta", "eta", "eta_beta", "tau"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not isinstance(self.object_present, bool):
            raise ParameterError(f"object_present must be a boolean, got {self.object_present!r}")

        if self.N < 0 or self.N_beta < 0:
            raise ParameterError("photon counts N and N_beta must be non-negative")
        if self.M < 1:
            raise ParameterError(f"M must be >= 1, got {self.M}")
        if self.M_beta < 0:
            raise ParameterError(f"M_beta must be >= 0, got {self.M_beta}")
        if self.M_beta == 0 and self.N_beta > 0:
            raise ParameterError("bath photons (N_beta > 0) require at least one bath mode")
        if not 0 < self.eta <= 1:
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if not 0 < self.eta_beta <= 1:
            raise ParameterError(f"eta_beta must lie in (0, 1], got {self.eta_beta}")
        if not 0 <= self.tau <= 1:
            raise ParameterError(f"tau must lie in [0, 1], got {self.tau}")
        if self.N_pix < 1:
            raise ParameterError(f"N_pix must be >= 1, got {self.N_pix}")

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["source_kind"] = self.source_kind.value
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Scenario":
        if not isinstance(data, Mapping):
            raise ParameterError(f"scenario must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"unknown scenario key(s): {', '.join(unknown)}")
        required = {f.name for f in dataclasses.fields(cls) if f.default is dataclasses.MISSING}
        missing = sorted(required - set(data))
        if missing:
            raise ParameterError(f"missing scenario key(s): {', '.join(missing)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ParameterError(str(exc)) from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Scenario":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed scenario JSON: {exc}") from None
        return cls.from_dict(data)


@dataclass(frozen=True)
class EffectiveCM:
    """Effective two-mode covariance matrix together with the scenario it came from."""

    cm: TwoModeCM
    scenario: Scenario

    @property
    def bright_arm_variance(self) -> float:
        return self.cm.a

    @property
    def bath_arm_variance(self) -> float:
        return self.cm.b


def mu_per_mode(s: Scenario) -> tuple[float, float]:
    """Mean occupation per mode at the source and in the bath."""
    mu1 = s.N / (s.eta * s.M)
    if s.M_beta == 0:
        if s.N_beta > 0:
            raise ParameterError("bath photons (N_beta > 0) require at least one bath mode")
        mu_beta = 0.0
    else:
        mu_beta = s.N_beta / (s.eta_beta * s.M_beta)
    return mu1, mu_beta


def _require_balanced(s: Scenario) -> None:
    # The closed-form covariance elements already fold in a 50:50 object.
    if s.tau != BALANCED_TAU:
        raise ParameterError(
            f"effective covariance matrices assume a balanced object (tau = 0.5), got tau = {s.tau}"
        )


def _bath_arm_variance(s: Scenario, mu1: float, mu_beta: float, with_object: bool) -> float:
    total = s.M + s.M_beta
    source = s.eta * mu1 * s.M if with_object else 0.0
    b = 1.0 + (source + 2.0 * s.eta_beta * mu_beta * s.M_beta) / total
    if s.M_beta:
        check = 1.0 + ((s.N if with_object else 0.0) + 2.0 * s.N_beta) / total
        if not math.isclose(b, check, rel_tol=1e-12, abs_tol=1e-12):
            raise AssertionError(f"bath-arm variance identity broken: {b!r} != {check!r}")
    return b


def effective_cm(s: Scenario) -> EffectiveCM:
    """Effective covariance matrix of the object-present configuration.

    ``a = 1 + 2 eta mu1``
    ``b = 1 + (eta mu1 M + 2 eta_b mu_b M_b) / (M + M_b)``
    ``c = d = eta mu1 g`` for THB and ``c = -d = eta sqrt(mu1^2 + mu1) g`` for TWB,
    where ``g = sqrt(2 M / (M + M_b))``.
    """
    if not s.object_present:
        raise ParameterError("effective_cm describes the object-present configuration; "
                             "use object_absent_cm for the other one")
    _require_balanced(s)
    mu1, mu_beta = mu_per_mode(s)
    a = 1.0 + 2.0 * s.eta * mu1
    b = _bath_arm_variance(s, mu1, mu_beta, with_object=True)
    geometry = math.sqrt(2.0 * s.M / (s.M + s.M_beta))
    if s.source_kind is SourceKind.THB:
        c = d = s.eta * mu1 * geometry
    else:
        c = s.eta * math.sqrt(mu1 * mu1 + mu1) * geometry
        d = -c
    cm = TwoModeCM(a, b, c, d)
    reason = physicality_violation(cm)
    if reason is not None:
        raise AssertionError(f"effective CM for {s} is not physical ({reason})")
    return EffectiveCM(cm, s)


def object_absent_cm(s: Scenario) -> EffectiveCM:
    """Effective CM with the object removed: no cross terms, bath-only signal arm.

    Not part of the published model; used only to cross-check Monte Carlo
    sampling, never for ratio claims.
    """
    _require_balanced(s)
    mu1, mu_beta = mu_per_mode(s)
    a = 1.0 + 2.0 * s.eta * mu1
    b = _bath_arm_variance(s, mu1, mu_beta, with_object=False)
    cm = TwoModeCM(a, b, 0.0, 0.0)
    assert is_physical(cm)
    return EffectiveCM(cm, s.replace(object_present=False))


def mutual_info(s: Scenario) -> float:
    return mutual_info_renyi2(effective_cm(s).cm)


def asymptotic_ratio(s_twb: Scenario, s_thb: Scenario) -> float:
    """Large-bath limit ``|c_TWB / c_THB|^2 = (mu_T^2 + mu_T) / mu_th^2``.

    Roles are positional: the first scenario plays the twin-beam source.
    """
    for name in ("M", "M_beta", "eta"):
        if getattr(s_twb, name) != getattr(s_thb, name):
            raise ParameterError(f"asymptotic ratio needs a shared {name}")
    mu_t, _ = mu_per_mode(s_twb)
    mu_th, _ = mu_per_mode(s_thb)
    return enhancement_asymptote(mu_t, mu_th)


def enhancement_asymptote(mu_twb: float, mu_thb: float) -> float:
    if mu_thb == 0:
        raise DomainError("THB cross-correlation vanishes (mu = 0); ratio undefined")
    return (mu_twb * mu_twb + mu_twb) / (mu_thb * mu_thb)


def asymptote_from_counts(n_twb: float, n_thb: float, eta: float, m: int) -> float:
    """Large-bath asymptote directly from detected counts, mode number and efficiency."""
    if not 0 < eta <= 1:
        raise ParameterError(f"eta must lie in (0, 1], got {eta}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if n_twb < 0 or n_thb < 0:
        raise ParameterError("photon counts must be non-negative")
    return enhancement_asymptote(n_twb / (eta * m), n_thb / (eta * m))


def mi_ratio(s_twb: Scenario, s_thb: Scenario) -> float:
    mi_thb = mutual_info(s_thb)
    if mi_thb == 0:
        raise DomainError("THB mutual information is zero; ratio undefined")
    return mutual_info(s_twb) / mi_thb
