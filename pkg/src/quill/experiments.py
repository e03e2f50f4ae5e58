"""Bath-photon sweeps and the reference figure configurations."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .errors import ParameterError
from .model import Scenario, SourceKind, asymptotic_ratio, mi_ratio, mutual_info
from .photon_stats import snr
from .svg import Series, line_plot

COLUMNS = ("N_beta", "SNR_TWB", "SNR_THB", "MI_TWB", "MI_THB", "R_SNR", "R_MI", "asymptote")
DEFAULT_GRID = (10.0, 1e7, 60)

# Parameter sets of the two reference figures. Figure 2 uses a common N for
# both sources; figure 3 uses the two measured source brightnesses.
FIGURE2 = dict(N=4000.0, M=90000, M_beta=50, eta=0.38, eta_beta=0.5)
FIGURE3 = dict(N_twb=4232.0, N_thb=3278.0, M=90000, M_beta=1300, eta=0.38, eta_beta=0.5)

FIGURE3_NOTE = ("theory curves only: experimental data points and confidence "
                "shadings require the raw acquisitions and are not reconstructed")


@dataclass(frozen=True)
class Grid:
    min: float
    max: float
    count: int

    def __post_init__(self):
        if isinstance(self.count, bool) or int(self.count) != self.count:
            raise ParameterError(f"grid count must be an integer, got {self.count!r}")
        if self.count < 1:
            raise ParameterError("grid is empty (count must be >= 1)")
        if not (math.isfinite(self.min) and math.isfinite(self.max)) or self.min <= 0:
            raise ParameterError("grid bounds must be finite and positive")
        if self.count > 1 and not self.max > self.min:
            raise ParameterError("grid max must exceed grid min")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        return np.logspace(math.log10(self.min), math.log10(self.max), int(self.count))

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """Parse ``MIN:MAX:COUNT``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ParameterError(f"grid must look like MIN:MAX:COUNT, got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError:
            raise ParameterError(f"grid must look like MIN:MAX:COUNT, got {text!r}") from None


@dataclass(frozen=True)
class SweepSpec:
    twb: Scenario
    thb: Scenario
    grid: Grid
    variable: str = "N_beta"
    outputs: tuple = COLUMNS

    def __post_init__(self):
        if self.variable != "N_beta":
            raise ParameterError(f"only N_beta can be swept, got {self.variable!r}")
        if self.twb.source_kind is not SourceKind.TWB or self.thb.source_kind is not SourceKind.THB:
            raise ParameterError("sweep needs a TWB and a THB base scenario")
        bad = [c for c in self.outputs if c not in COLUMNS]
        if bad:
            raise ParameterError(f"unknown output column(s): {', '.join(bad)}")
        if not self.outputs:
            raise ParameterError("no output columns requested")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SweepSpec":
        allowed = {"twb", "thb", "grid", "variable", "outputs"}
        if not isinstance(data, Mapping):
            raise ParameterError("sweep spec must be a JSON object")
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ParameterError(f"unknown sweep spec key(s): {', '.join(unknown)}")
        for key in ("twb", "thb", "grid"):
            if key not in data:
                raise ParameterError(f"sweep spec is missing key {key!r}")
        grid = data["grid"]
        if not isinstance(grid, Mapping):
            raise ParameterError("key 'grid' must be an object with count, min, max")
        extra = sorted(set(grid) - {"count", "min", "max"})
        if extra:
            raise ParameterError(f"unknown grid key(s): {', '.join(extra)}")
        missing = sorted({"count", "min", "max"} - set(grid))
        if missing:
            raise ParameterError(f"grid is missing key(s): {', '.join(missing)}")
        try:
            twb = Scenario.from_dict(data["twb"])
        except ParameterError as exc:
            raise ParameterError(f"in 'twb': {exc}") from None
        try:
            thb = Scenario.from_dict(data["thb"])
        except ParameterError as exc:
            raise ParameterError(f"in 'thb': {exc}") from None
        outputs = data.get("outputs", list(COLUMNS))
        if not isinstance(outputs, list):
            raise ParameterError("key 'outputs' must be a list of column names")
        return cls(
            twb=twb,
            thb=thb,
            grid=Grid(float(grid["min"]), float(grid["max"]), grid["count"]),
            variable=data.get("variable", "N_beta"),
            outputs=tuple(outputs),
        )

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"malformed sweep spec JSON: {exc}") from None
        return cls.from_dict(data)


@dataclass
class SweepTable:
    columns: tuple
    rows: list = field(default_factory=list)
    notes: tuple = ()

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_bytes(self.to_csv().encode("ascii"))


def run_sweep(spec: SweepSpec) -> SweepTable:
    asymptote = asymptotic_ratio(spec.twb, spec.thb)
    table = SweepTable(columns=tuple(spec.outputs))
    for n_beta in spec.grid.values():
        n_beta = float(n_beta)
        twb = spec.twb.replace(N_beta=n_beta)
        thb = spec.thb.replace(N_beta=n_beta)
        snr_twb, snr_thb = snr(twb), snr(thb)
        mi_twb, mi_thb = mutual_info(twb), mutual_info(thb)
        row = {
            "N_beta": n_beta,
            "SNR_TWB": snr_twb,
            "SNR_THB": snr_thb,
            "MI_TWB": mi_twb,
            "MI_THB": mi_thb,
            "R_SNR": snr_twb / snr_thb,
            "R_MI": mi_ratio(twb, thb),
            "asymptote": asymptote,
        }
        table.rows.append(tuple(row[c] for c in table.columns))
    return table


def _pair(n_twb: float, n_thb: float, M: int, M_beta: int, eta: float, eta_beta: float,
          tau: float = 0.5, N_pix: int = 80) -> tuple[Scenario, Scenario]:
    twb = Scenario(SourceKind.TWB, n_twb, M, 0.0, M_beta, eta, eta_beta, tau, True, N_pix)
    return twb, twb.replace(source_kind=SourceKind.THB, N=n_thb)


def figure2_spec(grid: Optional[Grid] = None, **overrides) -> SweepSpec:
    p = {**FIGURE2, **overrides}
    n = p.pop("N")
    twb, thb = _pair(n, n, **p)
    return SweepSpec(twb, thb, grid or Grid(*DEFAULT_GRID))


def figure3_spec(grid: Optional[Grid] = None, **overrides) -> SweepSpec:
    p = {**FIGURE3, **overrides}
    if "N" in p:
        p["N_twb"] = p["N_thb"] = p.pop("N")
    twb, thb = _pair(p.pop("N_twb"), p.pop("N_thb"), **p)
    return SweepSpec(twb, thb, grid or Grid(*DEFAULT_GRID))


def ratio_plot(table: SweepTable, title: str) -> str:
    x = table.column("N_beta")
    return line_plot(
        [
            Series("R_SNR", x, table.column("R_SNR")),
            Series("R_MI", x, table.column("R_MI"), dashed=True),
            Series("asymptote", x, table.column("asymptote"), dashed=True, color="#7f7f7f"),
        ],
        title=title, xlabel="bath photons per pixel N_beta", ylabel="TWB / THB ratio",
    )


def figure3_plots(table: SweepTable) -> dict:
    x = table.column("N_beta")
    return {
        "figure3_snr.svg": line_plot(
            [Series("SNR TWB", x, table.column("SNR_TWB")),
             Series("SNR THB", x, table.column("SNR_THB"), dashed=True)],
            title="Per-pair SNR", xlabel="bath photons per pixel N_beta", ylabel="SNR", log_y=True),
        "figure3_mi.svg": line_plot(
            [Series("MI TWB", x, table.column("MI_TWB")),
             Series("MI THB", x, table.column("MI_THB"), dashed=True)],
            title="Effective Renyi-2 mutual information", xlabel="bath photons per pixel N_beta",
            ylabel="MI (nats)", log_y=True),
        "figure3_ratios.svg": ratio_plot(table, "Enhancement ratios (theory)"),
    }
