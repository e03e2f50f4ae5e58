"""Monte Carlo oracle for the analytic photon-counting and covariance results.

Two samplers are used on purpose:

* photon counts are drawn mode by mode in the number basis (TWB) or from the
  positive P-representation (THB and bath), which reproduces fourth-order
  counting statistics exactly;
* the effective quadratures are drawn from the Gaussian Wigner function, which
  is exact for second moments and hence for the covariance matrix and the
  Renyi-2 mutual information, but not for photon counting.

Random streams
--------------
With ``stream_mode="per-shot-counter"`` shots are grouped in fixed blocks of
``CHUNK_SHOTS``. Block ``j`` draws from a Philox generator keyed by
``(seed, stream tag)`` whose counter starts at ``j << 192``, so each shot's
draws are a pure function of (seed, shot index, scenario) no matter how
blocks are spread over worker threads. ``"sequential"`` uses a single PCG64
stream consumed block after block and is always run on one thread.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .errors import ParameterError
from .model import Scenario, SourceKind, effective_cm, mu_per_mode, object_absent_cm
from .photon_stats import EMPIRICAL, ESTIMATORS, POPULATION

CHUNK_SHOTS = 4096
# Cap on per-mode draws held in memory at once inside a block.
_MAX_DRAWS = 1 << 21
MIN_BATCHES = 20

PER_SHOT_COUNTER = "per-shot-counter"
SEQUENTIAL = "sequential"
STREAM_MODES = (PER_SHOT_COUNTER, SEQUENTIAL)

# Stream tags keep the object-in, object-out and quadrature draws disjoint.
_TAG_IN, _TAG_OUT, _TAG_QUAD = 1, 2, 3

QUANTITIES = (
    "mean_s", "mean_r", "var_s", "var_r", "cov_sr",
    "delta_mean", "delta_var", "snr", "epsilon", "nrf", "mi",
)


@dataclass(frozen=True)
class MCConfig:
    seed: int = 0
    shots: int = 200_000
    pixels: Optional[int] = None
    stream_mode: str = PER_SHOT_COUNTER
    batches: int = 40
    workers: int = 1
    estimator: str = POPULATION

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.shots < 2:
            raise ParameterError("need at least 2 shots")
        if self.stream_mode not in STREAM_MODES:
            raise ParameterError(f"unknown stream_mode {self.stream_mode!r}")
        if self.batches < MIN_BATCHES:
            raise ParameterError(f"need at least {MIN_BATCHES} batches for a standard error")
        if self.shots < self.batches:
            raise ParameterError(f"{self.shots} shots cannot fill {self.batches} batches")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        if self.estimator not in ESTIMATORS:
            raise ParameterError(f"unknown estimator {self.estimator!r}")
        if self.pixels is not None and self.pixels < 1:
            raise ParameterError("pixels must be >= 1")

    def pixels_for(self, s: Scenario) -> int:
        return s.N_pix if self.pixels is None else self.pixels


@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    n_samples: int
    seed: int
    convention: str = POPULATION
    meta: dict = field(default_factory=dict, compare=False)

    def z_score(self, reference: float) -> float:
        diff = self.value - reference
        if self.std_error == 0:
            return 0.0 if diff == 0 else math.copysign(math.inf, diff)
        return diff / self.std_error


# ---------------------------------------------------------------- samplers

def geometric(rng: np.random.Generator, mean: float, size) -> np.ndarray:
    """Bose-Einstein counts, P(n) = mean^n / (1 + mean)^(n + 1), by inversion."""
    if mean == 0:
        return np.zeros(size, dtype=np.int64)
    u = 1.0 - rng.random(size)  # (0, 1]
    return np.floor(np.log(u) / math.log(mean / (1.0 + mean))).astype(np.int64)


def _mode_blocks(n_modes: int, batch: int):
    step = max(1, _MAX_DRAWS // max(batch, 1))
    for start in range(0, n_modes, step):
        yield min(step, n_modes - start)


def _bath_counts(s: Scenario, rng: np.random.Generator, size) -> np.ndarray:
    _, mu_beta = mu_per_mode(s)
    if s.M_beta == 0 or mu_beta == 0:
        return np.zeros(size, dtype=np.int64)
    batch = int(np.prod(size))
    intensity = np.zeros(size)
    for k in _mode_blocks(s.M_beta, batch):
        intensity += rng.exponential(mu_beta, size=(*size, k)).sum(axis=-1)
    # Conditionally independent Poissons over modes add to one Poisson.
    return rng.poisson(s.eta_beta * intensity)


def sample_thb_counts(s: Scenario, rng: np.random.Generator, size=(1,)):
    """Signal and reference counts for split thermal light, via P-representation sampling."""
    if s.source_kind is not SourceKind.THB:
        raise ParameterError("sample_thb_counts needs a THB scenario")
    size = tuple(np.atleast_1d(size))
    mu1, _ = mu_per_mode(s)
    batch = int(np.prod(size))
    intensity = np.zeros(size)
    if mu1 > 0:
        for k in _mode_blocks(s.M, batch):
            intensity += rng.exponential(mu1, size=(*size, k)).sum(axis=-1)
    n_r = rng.poisson(s.eta * intensity)
    if s.object_present:
        n_s = rng.poisson(s.eta * s.tau * intensity)
    else:
        n_s = np.zeros(size, dtype=np.int64)
    return n_s + _bath_counts(s, rng, size), n_r


def sample_twb_counts(s: Scenario, rng: np.random.Generator, size=(1,)):
    """Signal and reference counts for twin beams in the photon-number basis.

    Each pair holds ``n`` photons in both arms (geometric ``n``); losses are
    independent binomial thinnings per arm given ``n``.
    """
    if s.source_kind is not SourceKind.TWB:
        raise ParameterError("sample_twb_counts needs a TWB scenario")
    size = tuple(np.atleast_1d(size))
    mu1, _ = mu_per_mode(s)
    batch = int(np.prod(size))
    pairs = np.zeros(size, dtype=np.int64)
    if mu1 > 0:
        for k in _mode_blocks(s.M, batch):
            pairs += geometric(rng, mu1, (*size, k)).sum(axis=-1)
    # Binomial thinnings of each mode with a common probability add up.
    n_r = rng.binomial(pairs, s.eta)
    if s.object_present:
        n_s = rng.binomial(pairs, s.eta * s.tau)
    else:
        n_s = np.zeros(size, dtype=np.int64)
    return n_s + _bath_counts(s, rng, size), n_r


def sample_counts(s: Scenario, rng: np.random.Generator, size=(1,)):
    if s.source_kind is SourceKind.TWB:
        return sample_twb_counts(s, rng, size)
    return sample_thb_counts(s, rng, size)


def sample_effective_quadratures(s: Scenario, rng: np.random.Generator, n: int) -> np.ndarray:
    """Draw ``n`` zero-mean 4-vectors with the effective covariance matrix (vacuum = identity)."""
    sigma = effective_cm(s).cm.matrix()
    chol = np.linalg.cholesky(sigma)
    return rng.standard_normal((n, 4)) @ chol.T


# ---------------------------------------------------------------- streams

def _chunk_generator(seed: int, tag: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed, tag], dtype=np.uint64),
                         counter=np.array([0, 0, 0, chunk], dtype=np.uint64))
    )


def _run_chunks(cfg: MCConfig, tag: int, n_shots: int, fill: Callable[[np.random.Generator, slice], None]):
    bounds = [(j, slice(j * CHUNK_SHOTS, min(n_shots, (j + 1) * CHUNK_SHOTS)))
              for j in range(math.ceil(n_shots / CHUNK_SHOTS))]
    if cfg.stream_mode == SEQUENTIAL:
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, tag])))
        for _, sl in bounds:
            fill(rng, sl)
        return
    task = lambda item: fill(_chunk_generator(cfg.seed, tag, item[0]), item[1])
    if cfg.workers == 1:
        for item in bounds:
            task(item)
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            list(pool.map(task, bounds))


def draw_counts(s: Scenario, cfg: MCConfig, tag: Optional[int] = None):
    """Count samples of shape ``(shots, pixels)`` for the scenario as given."""
    if tag is None:
        tag = _TAG_IN if s.object_present else _TAG_OUT
    pixels = cfg.pixels_for(s)
    n_s = np.empty((cfg.shots, pixels), dtype=np.int64)
    n_r = np.empty((cfg.shots, pixels), dtype=np.int64)

    def fill(rng, sl):
        n = sl.stop - sl.start
        n_s[sl], n_r[sl] = sample_counts(s, rng, (n, pixels))

    _run_chunks(cfg, tag, cfg.shots, fill)
    return n_s, n_r


def draw_quadratures(s: Scenario, cfg: MCConfig) -> np.ndarray:
    pixels = cfg.pixels_for(s)
    out = np.empty((cfg.shots * pixels, 4))
    cm = effective_cm(s) if s.object_present else object_absent_cm(s)
    chol = np.linalg.cholesky(cm.cm.matrix())

    def fill(rng, sl):
        lo, hi = sl.start * pixels, sl.stop * pixels
        out[lo:hi] = rng.standard_normal((hi - lo, 4)) @ chol.T

    _run_chunks(cfg, _TAG_QUAD, cfg.shots, fill)
    return out


# ---------------------------------------------------------------- estimators

def _safe_ratio(num: float, den_sq: float) -> float:
    return num / math.sqrt(den_sq) if den_sq > 0 else math.nan


def _frame_covariances(ns: np.ndarray, nr: np.ndarray) -> np.ndarray:
    s = ns.astype(float)
    r = nr.astype(float)
    ds = s - s.mean(axis=1, keepdims=True)
    dr = r - r.mean(axis=1, keepdims=True)
    return (ds * dr).sum(axis=1) / (s.shape[1] - 1)


def _count_stats(si, ri, so, ro, estimator: str, pixels: int, want) -> Dict[str, float]:
    """All count-based statistics on one subset of shots."""
    s = si.astype(float).ravel()
    r = ri.astype(float).ravel()
    n = s.size
    ms, mr = s.mean(), r.mean()
    ds, dr = s - ms, r - mr
    out = {
        "mean_s": ms,
        "mean_r": mr,
        "var_s": float(ds @ ds) / (n - 1),
        "var_r": float(dr @ dr) / (n - 1),
        "cov_sr": float(ds @ dr) / (n - 1),
    }
    if "epsilon" in want:
        out["epsilon"] = _safe_ratio(out["cov_sr"], (out["var_s"] - ms) * (out["var_r"] - mr))
    if "nrf" in want:
        diff = ds - dr
        out["nrf"] = float(diff @ diff) / (n - 1) / (ms + mr)
    if not {"delta_mean", "delta_var", "snr"} & set(want):
        return out

    if estimator == POPULATION:
        # Delta = N_s N_r - <N_s><N_r>; its mean is the covariance and its
        # variance is var(N_s N_r).
        prod_in = s * r
        out["delta_mean"] = out["cov_sr"]
        out["delta_var"] = float(prod_in.var(ddof=1))
        if "snr" in want:
            so_, ro_ = so.astype(float).ravel(), ro.astype(float).ravel()
            cov_out = float((so_ - so_.mean()) @ (ro_ - ro_.mean())) / (n - 1)
            var_out = float((so_ * ro_).var(ddof=1))
            out["snr"] = _safe_ratio(abs(out["delta_mean"] - cov_out), out["delta_var"] + var_out)
    else:
        c_in = _frame_covariances(si, ri)
        out["delta_mean"] = float(c_in.mean())
        out["delta_var"] = float(c_in.var(ddof=1))
        if "snr" in want:
            c_out = _frame_covariances(so, ro)
            noise = pixels * (out["delta_var"] + float(c_out.var(ddof=1)))
            out["snr"] = _safe_ratio(abs(out["delta_mean"] - float(c_out.mean())), noise)
    return out


def _mi_stats(x: np.ndarray, estimator, pixels, want) -> Dict[str, float]:
    cov = x.T @ x / x.shape[0]
    a = 0.5 * (cov[0, 0] + cov[1, 1])
    b = 0.5 * (cov[2, 2] + cov[3, 3])
    ab = a * b
    # A sample CM close to the physical boundary may dip just below it, so
    # the closed form is applied without the physicality gate.
    x_c, x_d = cov[0, 2] ** 2 / ab, cov[1, 3] ** 2 / ab
    if x_c >= 1 or x_d >= 1:
        return {"mi": math.nan}
    return {"mi": -0.5 * (math.log1p(-x_c) + math.log1p(-x_d))}


def _jackknife(stats: Callable[..., Dict[str, float]], arrays, batches: int, want):
    """Full-sample values and delete-one-batch jackknife standard errors.

    Batches are contiguous blocks of shots. For a plain mean the jackknife
    reproduces the batch-means standard error exactly; for ratios such as the
    SNR it stays stable where per-batch estimates would not.
    """
    full = stats(*arrays)
    n = arrays[0].shape[0]
    edges = np.linspace(0, n, batches + 1).astype(int)
    loo = {k: [] for k in want}
    for lo, hi in zip(edges[:-1], edges[1:]):
        keep = np.r_[0:lo, hi:n]
        sub = stats(*(a[keep] for a in arrays))
        for k in want:
            loo[k].append(sub[k])
    errors = {}
    for k in want:
        vals = np.asarray(loo[k])
        errors[k] = float(math.sqrt((batches - 1) / batches * np.sum((vals - vals.mean()) ** 2)))
    return {k: full[k] for k in want}, errors


def estimate_all(s: Scenario, cfg: MCConfig, quantities=QUANTITIES) -> Dict[str, MCEstimate]:
    """Estimate several quantities from one shared set of draws.

    Count quantities describe the scenario exactly as given; the SNR always
    contrasts it with an independently drawn object-absent configuration.
    """
    unknown = set(quantities) - set(QUANTITIES)
    if unknown:
        raise ParameterError(f"unknown quantity: {sorted(unknown)}")
    pixels = cfg.pixels_for(s)
    if cfg.estimator == EMPIRICAL and pixels < 2:
        raise ParameterError("empirical estimator needs at least 2 pixels per frame")
    meta = {"stream_mode": cfg.stream_mode, "batches": cfg.batches, "pixels": pixels}
    results: Dict[str, MCEstimate] = {}

    count_q = [q for q in quantities if q != "mi"]
    if count_q:
        si, ri = draw_counts(s, cfg, _TAG_IN)
        if "snr" in count_q:
            so, ro = draw_counts(s.replace(object_present=False), cfg, _TAG_OUT)
        else:
            so, ro = si, ri
        stats = lambda *a: _count_stats(*a, cfg.estimator, pixels, count_q)
        values, errors = _jackknife(stats, (si, ri, so, ro), cfg.batches, count_q)
        for q in count_q:
            convention = cfg.estimator if q in ("delta_mean", "delta_var", "snr") else POPULATION
            results[q] = MCEstimate(values[q], errors[q], cfg.shots * pixels, cfg.seed, convention, meta)
    if "mi" in quantities:
        x = draw_quadratures(s, cfg)
        stats = lambda a: _mi_stats(a, cfg.estimator, pixels, ("mi",))
        values, errors = _jackknife(stats, (x,), cfg.batches, ("mi",))
        results["mi"] = MCEstimate(values["mi"], errors["mi"], x.shape[0], cfg.seed, "wigner", meta)
    return results


def estimate(s: Scenario, quantity: str, cfg: MCConfig):
    """Estimate one quantity; ``"count_moments"`` returns a dict of the five count moments."""
    if quantity == "count_moments":
        return estimate_all(s, cfg, ("mean_s", "mean_r", "var_s", "var_r", "cov_sr"))
    return estimate_all(s, cfg, (quantity,))[quantity]
