"""Analytic-versus-Monte-Carlo validation campaign on small instances."""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import DomainError
from .model import Scenario, SourceKind, mutual_info
from .montecarlo import MCConfig, QUANTITIES, estimate_all
from . import photon_stats as ps

Z_PASS = 3.0
Z_HARD = 4.0
TESTS_PER_OUTLIER = 30
ETA, ETA_BETA = 0.38, 0.5


def _instance(kind: SourceKind, M: int, bath: str) -> tuple[str, Scenario]:
    mu1 = 0.1 if M > 1 else 0.5
    M_beta, mu_beta = {"none": (0, 0.0), "moderate": (20, 2.0), "dominant": (20, 50.0)}[bath]
    s = Scenario(kind, ETA * M * mu1, M, ETA_BETA * M_beta * mu_beta, M_beta, ETA, ETA_BETA)
    return f"{kind.value}-M{M}-{bath}", s


def standard_suite() -> List[tuple[str, Scenario]]:
    """Vacuum plus TWB/THB x {M=1, M=500} x {no, moderate, dominant bath}."""
    suite = [("vacuum", Scenario(SourceKind.TWB, 0.0, 1, 0.0, 0, ETA, ETA_BETA))]
    for kind in (SourceKind.TWB, SourceKind.THB):
        for M in (1, 500):
            for bath in ("none", "moderate", "dominant"):
                suite.append(_instance(kind, M, bath))
    return suite


def analytic_values(s: Scenario) -> Dict[str, float]:
    """Analytic counterparts of every Monte Carlo quantity; undefined ones are omitted."""
    cm = ps.count_moments(s)
    ds = ps.delta_stats(s)
    out = {
        "mean_s": cm.mean_s,
        "mean_r": cm.mean_r,
        "var_s": cm.var_s,
        "var_r": cm.var_r,
        "cov_sr": cm.cov_sr,
        "delta_mean": ds.mean_in,
        "delta_var": ds.var_in,
    }
    optional: Dict[str, Callable[[], float]] = {
        "snr": lambda: ps.snr(s),
        "epsilon": lambda: ps.cauchy_schwarz_epsilon(s),
        "nrf": lambda: ps.noise_reduction_factor(s),
        "mi": lambda: mutual_info(s) if s.N > 0 else math.nan,
    }
    for key, fn in optional.items():
        try:
            value = fn()
        except DomainError:
            continue
        if math.isfinite(value):
            out[key] = value
    return out


@dataclass(frozen=True)
class ValidationRow:
    instance: str
    quantity: str
    analytic: float
    mc: float
    std_error: float
    z: float
    seed: int
    attempt: int = 1


@dataclass(frozen=True)
class CheckRow:
    instance: str
    description: str
    value: float
    passed: bool


@dataclass
class ValidationReport:
    rows: List[ValidationRow]
    checks: List[CheckRow]
    passed: bool
    rerun: List[str]

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 2

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("instance,quantity,analytic,mc,std_error,z,seed,attempt\n")
        for r in self.rows:
            buf.write(f"{r.instance},{r.quantity},{r.analytic:.17g},{r.mc:.17g},"
                      f"{r.std_error:.17g},{r.z:.17g},{r.seed},{r.attempt}\n")
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{'instance':<20} {'quantity':<11} {'analytic':>14} {'monte carlo':>14} "
                 f"{'std err':>11} {'z':>7}"]
        for r in self.rows:
            flag = "" if abs(r.z) <= Z_PASS else ("  <-- outlier" if abs(r.z) <= Z_HARD else "  <-- FAIL")
            lines.append(f"{r.instance:<20} {r.quantity:<11} {r.analytic:>14.6g} {r.mc:>14.6g} "
                         f"{r.std_error:>11.3g} {r.z:>7.2f}{flag}")
        for c in self.checks:
            lines.append(f"{c.instance:<20} check: {c.description} = {c.value:.6g} "
                         f"{'ok' if c.passed else 'FAIL'}")
        if self.rerun:
            lines.append(f"re-run on fresh seed: {', '.join(self.rerun)}")
        lines.append(f"{len(self.rows)} comparisons, max |z| = "
                     f"{max((abs(r.z) for r in self.rows), default=0):.2f}: "
                     f"{'PASSED' if self.passed else 'FAILED'}")
        return "\n".join(lines) + "\n"


def instance_seed(seed: int, index: int, attempt: int = 1) -> int:
    state = np.random.SeedSequence([seed, index, attempt]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def _compare(name: str, s: Scenario, cfg: MCConfig, attempt: int) -> List[ValidationRow]:
    ref = analytic_values(s)
    quantities = [q for q in QUANTITIES if q in ref]
    mc = estimate_all(s, cfg, quantities)
    return [
        ValidationRow(name, q, ref[q], mc[q].value, mc[q].std_error, mc[q].z_score(ref[q]), cfg.seed, attempt)
        for q in quantities
    ]


def _acceptable(rows: Sequence[ValidationRow]) -> bool:
    zs = [abs(r.z) for r in rows]
    if any(not math.isfinite(z) or z > Z_HARD for z in zs):
        return False
    outliers = sum(z > Z_PASS for z in zs)
    return outliers <= len(zs) // TESTS_PER_OUTLIER


def classicality_checks(suite) -> List[CheckRow]:
    checks = []
    for name, s in suite:
        if s.source_kind is SourceKind.THB and s.N > 0:
            eps = ps.cauchy_schwarz_epsilon(s)
            checks.append(CheckRow(name, "epsilon_THB <= 1", eps, eps <= 1 + 1e-9))
    return checks


def run_validation(cfg: MCConfig, suite=None, progress: Optional[Callable[[str], None]] = None) -> ValidationReport:
    """Compare every analytic quantity with its Monte Carlo estimate.

    Each instance gets its own seed derived from ``cfg.seed``. Passing needs
    every |z| <= 3, except that one outlier with |z| <= 4 is tolerated per 30
    comparisons. Otherwise the instances holding an outlier are re-run once on
    a fresh seed and the rule is applied again.
    """
    suite = standard_suite() if suite is None else list(suite)
    per_instance: Dict[str, List[ValidationRow]] = {}
    for idx, (name, s) in enumerate(suite):
        if progress:
            progress(name)
        icfg = dataclasses.replace(cfg, seed=instance_seed(cfg.seed, idx))
        per_instance[name] = _compare(name, s, icfg, attempt=1)

    rows = [r for v in per_instance.values() for r in v]
    rerun: List[str] = []
    if not _acceptable(rows):
        for idx, (name, s) in enumerate(suite):
            if any(abs(r.z) > Z_PASS or not math.isfinite(r.z) for r in per_instance[name]):
                rerun.append(name)
                if progress:
                    progress(f"{name} (re-run)")
                icfg = dataclasses.replace(cfg, seed=instance_seed(cfg.seed, idx, attempt=2))
                per_instance[name] = _compare(name, s, icfg, attempt=2)
        rows = [r for v in per_instance.values() for r in v]

    checks = classicality_checks(suite)
    passed = _acceptable(rows) and all(c.passed for c in checks)
    return ValidationReport(rows, checks, passed, rerun)
