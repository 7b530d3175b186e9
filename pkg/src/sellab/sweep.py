"""Parameter sweeps over the pump rate: config parsing, per-point evaluation
and the versioned CSV format."""

from __future__ import annotations

import configparser
import csv
import io
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, SelLabError
from .hilbert import FockTruncation, basis_projector, LOWER
from .liouvillian import DEFAULT_TAIL_TOL, LaserParams, observables, solve_steady_state
from .moments import solve_moments
from .quasiprob import husimi_radial, relation_eq3_residual

SCHEMA_VERSION = "v1"
OUTPUT_CHOICES = ("mean_n", "mandel_q", "sigma_z", "residuals")
UNDEFINED = "undefined"
OUT_OF_REGIME = "out-of-regime"

_SCHEMA = {
    "params": {"omega_grid", "tau_rule", "eta"},
    "solver": {"n_max_initial", "tail_tol"},
    "output": {"columns", "plot"},
}
_REQUIRED = {"params": {"omega_grid", "tau_rule", "eta"}}


@dataclass(frozen=True)
class TauRule:
    kind: str
    value: Optional[float] = None

    def __call__(self, omega: float) -> float:
        if self.kind == "equal":
            return omega
        if self.kind == "double":
            return 2.0 * omega
        return self.value

    def __str__(self):
        return f"fixed:{self.value!r}" if self.kind == "fixed" else self.kind


@dataclass(frozen=True)
class SweepSpec:
    omega_grid: tuple[float, ...]
    tau_rule: TauRule
    eta: float
    n_max_initial: int = 40
    tail_tol: float = DEFAULT_TAIL_TOL
    outputs: tuple[str, ...] = OUTPUT_CHOICES
    plot: bool = False

    def __post_init__(self):
        grid = self.omega_grid
        if not grid:
            raise ConfigError("omega_grid is empty")
        if any(not math.isfinite(w) or w < 0 for w in grid):
            raise ConfigError("omega_grid values must be finite and >= 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("omega_grid must be strictly increasing")
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ConfigError(f"eta must be >= 0, got {self.eta!r}")
        if self.n_max_initial < 1:
            raise ConfigError("n_max_initial must be >= 1")
        if not 0 < self.tail_tol < 1:
            raise ConfigError("tail_tol must lie in (0, 1)")
        bad = set(self.outputs) - set(OUTPUT_CHOICES)
        if bad:
            raise ConfigError(f"unknown output columns: {sorted(bad)}")


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:step:end`` (inclusive) or a comma-separated list, optionally bracketed."""
    text = text.strip()
    if ":" in text:
        try:
            start, step, end = (float(x) for x in text.split(":"))
        except ValueError:
            raise ConfigError(f"bad range {text!r}, expected start:step:end") from None
        if not step > 0 or end < start:
            raise ConfigError(f"bad range {text!r}")
        count = int(math.floor((end - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    text = text.strip("[]")
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None


def parse_tau_rule(text: str) -> TauRule:
    text = text.strip().lower()
    if text in ("equal", "double"):
        return TauRule(text)
    m = re.fullmatch(r"fixed\s*(?:[:=]\s*|\(\s*)([^)\s]+)\s*\)?", text)
    if m:
        try:
            value = float(m.group(1))
        except ValueError:
            raise ConfigError(f"bad fixed tau {text!r}") from None
        if not value > 0:
            raise ConfigError("fixed tau must be > 0")
        return TauRule("fixed", value)
    raise ConfigError(f"tau_rule must be equal, double or fixed:<value>, got {text!r}")


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_config(text: str) -> SweepSpec:
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(parser[section]) - _SCHEMA[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    for section, keys in _REQUIRED.items():
        if section not in parser:
            raise ConfigError(f"missing section [{section}]")
        missing = keys - set(parser[section])
        if missing:
            raise ConfigError(f"missing keys in [{section}]: {sorted(missing)}")

    p = parser["params"]
    solver = parser["solver"] if "solver" in parser else {}
    output = parser["output"] if "output" in parser else {}
    try:
        eta = float(p["eta"])
        n_max = int(solver.get("n_max_initial", "40"))
        tail_tol = float(solver.get("tail_tol", repr(DEFAULT_TAIL_TOL)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    columns = tuple(c.strip() for c in output.get("columns", ",".join(OUTPUT_CHOICES)).split(",")
                    if c.strip())
    return SweepSpec(
        omega_grid=parse_grid(p["omega_grid"]),
        tau_rule=parse_tau_rule(p["tau_rule"]),
        eta=eta,
        n_max_initial=n_max,
        tail_tol=tail_tol,
        outputs=columns,
        plot=_bool(output.get("plot", "false")),
    )


def load_config(path: Union[str, Path]) -> SweepSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


Cell = Union[float, int, str, None]


@dataclass
class SweepRow:
    omega: float
    eta: float
    tau: float
    mean_n_analytic: Cell = None
    mean_n_numeric: Cell = None
    mandel_q_analytic: Cell = None
    mandel_q_numeric: Cell = None
    sigma_z_numeric: Cell = None
    delta_det: Cell = None
    truncation_used: Cell = None
    eq3_residual: Cell = None
    status: list = field(default_factory=list)


def _error_tag(exc: Exception) -> str:
    return f"error:{type(exc).__name__}"


def evaluate_point(omega: float, eta: float, tau: float, n_max_initial: int = 40,
                   tail_tol: float = DEFAULT_TAIL_TOL, residuals: bool = True) -> SweepRow:
    """Analytic and numerical results at one parameter point. Solver failures
    land in the row as sentinels instead of propagating."""
    row = SweepRow(omega=omega, eta=eta, tau=tau)

    try:
        sol = solve_moments(omega, eta, tau)
        row.mean_n_analytic = sol.mean_n
        row.mandel_q_analytic = sol.mandel_q if sol.mandel_q is not None else UNDEFINED
        row.delta_det = sol.det_delta
        if sol.out_of_regime:
            row.status.append(OUT_OF_REGIME)
    except SelLabError as exc:
        if omega == 0:
            # no pump: the right side (B, a10, 0) vanishes identically
            row.mean_n_analytic = 0.0
            row.mandel_q_analytic = UNDEFINED
            row.delta_det = UNDEFINED
        else:
            row.mean_n_analytic = row.mandel_q_analytic = row.delta_det = _error_tag(exc)
            row.status.append(_error_tag(exc))

    params = LaserParams.from_dimensionless(omega, eta, tau)
    try:
        if omega == 0 and params.kappa == 0:
            # nothing drives the field; the relaxed state is the ground-state vacuum
            trunc = FockTruncation(n_max_initial)
            rho = basis_projector(trunc, LOWER, 0)
        else:
            rho, trunc = solve_steady_state(params, n_max_initial, tail_tol)
        obs = observables(rho, trunc)
        row.mean_n_numeric = obs.mean_n
        row.mandel_q_numeric = obs.mandel_q if obs.mandel_q is not None else UNDEFINED
        row.sigma_z_numeric = obs.sigma_z_mean
        row.truncation_used = trunc.n_max
        if residuals:
            report = relation_eq3_residual(husimi_radial(rho, trunc), params, integral=False)
            row.eq3_residual = report.max_abs
    except SelLabError as exc:
        tag = _error_tag(exc)
        row.mean_n_numeric = row.mandel_q_numeric = row.sigma_z_numeric = tag
        row.truncation_used = row.eq3_residual = tag
        row.status.append(tag)
    return row


def _evaluate(args) -> SweepRow:
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Evaluate every grid point; rows come back in grid order for any ``jobs``."""
    tasks = [(w, spec.eta, spec.tau_rule(w), spec.n_max_initial, spec.tail_tol,
              "residuals" in spec.outputs) for w in spec.omega_grid]
    if jobs <= 1:
        return [_evaluate(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_evaluate, tasks))


def columns_for(outputs) -> list[str]:
    cols = ["omega", "eta", "tau"]
    if "mean_n" in outputs:
        cols += ["mean_n_analytic", "mean_n_numeric"]
    if "mandel_q" in outputs:
        cols += ["mandel_q_analytic", "mandel_q_numeric"]
    if "sigma_z" in outputs:
        cols += ["sigma_z_numeric"]
    cols += ["delta_det", "truncation_used"]
    if "residuals" in outputs:
        cols += ["eq3_residual"]
    cols += ["status"]
    return cols


def format_cell(value: Cell) -> str:
    if value is None:
        return UNDEFINED
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        return UNDEFINED
    return format(value, ".17g")


def write_csv(stream, columns: list[str], rows: list[dict], kind: str) -> None:
    """CSV with a leading ``# sel-lab <kind> schema v1`` line, LF endings."""
    stream.write(f"# sel-lab {kind} schema {SCHEMA_VERSION}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])


def sweep_rows_as_dicts(rows: list[SweepRow]) -> list[dict]:
    out = []
    for row in rows:
        d = {f.name: getattr(row, f.name) for f in fields(row)}
        d["status"] = ";".join(row.status) if row.status else "ok"
        out.append(d)
    return out


def sweep_csv(spec: SweepSpec, rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    write_csv(buf, columns_for(spec.outputs), sweep_rows_as_dicts(rows), "sweep")
    return buf.getvalue()


def read_csv(path: Union[str, Path]) -> tuple[list[str], list[dict]]:
    """Read back a sel-lab CSV; returns the header and rows as string dicts."""
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return list(reader.fieldnames or []), list(reader)
