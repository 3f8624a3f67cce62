"""Parameter sweeps over revenue profiles and the trends they should exhibit.

Two families of experiments:

* delta sweeps: ``ra_n = base * n**(-delta)`` for a set of ``b`` vectors,
  solved under centralized allocation (Nash metrics are recorded too);
* psi grids: two CPs with ``ra = [psi1, psi2]`` and a fixed ``b`` vector,
  comparing the two regimes.

Rows are emitted as CSV with 12 significant digits; ``inf`` marks an
unbounded price of anarchy and ``nan`` an undefined ratio.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from itertools import groupby
from os import PathLike
from typing import Iterable, Sequence, TextIO

import numpy as np

from .analytics import centralized_is_interior
from .centralized import SolverConfig, compare
from .model import market_from_products

COLUMNS = (
    "delta_or_psi1",
    "psi2",
    "b_config",
    "Q_c",
    "P_c",
    "gamma_c",
    "U_c",
    "Q_n",
    "P_n",
    "gamma_n",
    "U_n",
    "eta",
    "Gamma",
)
METRICS = COLUMNS[3:]

DEFAULT_DELTAS = tuple(round(0.1 * k, 10) for k in range(21))
N2_B_CONFIGS = ((1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0))
N5_B_CONFIGS = (
    (1.0,) * 5,
    (2.0,) * 5,
    (1.0, 1.0, 1.0, 2.0, 2.0),
    (2.0, 2.0, 2.0, 1.0, 1.0),
)


def psi_axis(step: float, stop: float) -> tuple[float, ...]:
    k = int(round(stop / step))
    return tuple(step * i for i in range(1, k + 1))


@dataclass(frozen=True)
class DeltaSweepSpec:
    n_cps: int = 2
    delta_grid: tuple[float, ...] = DEFAULT_DELTAS
    b_configs: tuple[tuple[float, ...], ...] = N2_B_CONFIGS
    base_coefficient: float = 2.0

    def __post_init__(self):
        if not self.delta_grid:
            raise ValueError("delta grid is empty")
        if any(b <= a for a, b in zip(self.delta_grid, self.delta_grid[1:])):
            raise ValueError("delta grid must be strictly increasing")
        for cfg in self.b_configs:
            if len(cfg) != self.n_cps:
                raise ValueError(f"b vector {cfg} does not have {self.n_cps} entries")


def default_delta_specs() -> list[DeltaSweepSpec]:
    return [DeltaSweepSpec(2, b_configs=N2_B_CONFIGS), DeltaSweepSpec(5, b_configs=N5_B_CONFIGS)]


@dataclass(frozen=True)
class PsiSweepSpec:
    psi1_grid: tuple[float, ...]
    psi2_grid: tuple[float, ...]
    b_config: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        for grid in (self.psi1_grid, self.psi2_grid):
            if not grid:
                raise ValueError("psi grid is empty")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError("psi grid must be strictly increasing")
            if grid[0] <= 0:
                raise ValueError("psi values must be positive")
        if len(self.b_config) != 2:
            raise ValueError("psi sweeps use exactly two CPs")


def default_psi_specs() -> list[PsiSweepSpec]:
    g1 = psi_axis(0.25, 5.0)
    g2 = psi_axis(0.25, 6.0)
    return [PsiSweepSpec(g1, g1, (1.0, 1.0)), PsiSweepSpec(g2, g2, (2.0, 2.0))]


@dataclass(frozen=True)
class SweepRow:
    delta_or_psi1: float
    psi2: float | None
    b_config: tuple[float, ...]
    Q_c: float
    P_c: float
    gamma_c: float
    U_c: float
    Q_n: float
    P_n: float
    gamma_n: float
    U_n: float
    eta: float
    Gamma: float

    @property
    def n_cps(self) -> int:
        return len(self.b_config)

    def key(self):
        return (self.delta_or_psi1, -1.0 if self.psi2 is None else self.psi2, self.b_config)


@dataclass
class SweepTable:
    """Rows of one or more sweeps; ``kind`` is ``"delta"`` or ``"psi"``."""

    kind: str
    rows: list[SweepRow] = field(default_factory=list)

    def sorted_rows(self) -> list[SweepRow]:
        return sorted(self.rows, key=SweepRow.key)

    def configs(self) -> list[tuple[float, ...]]:
        return sorted({r.b_config for r in self.rows})

    def select(self, b_config: Sequence[float]) -> list[SweepRow]:
        b_config = tuple(float(b) for b in b_config)
        return sorted((r for r in self.rows if r.b_config == b_config), key=SweepRow.key)

    def extend(self, other: SweepTable) -> SweepTable:
        if other.kind != self.kind:
            raise ValueError(f"cannot merge a {other.kind} table into a {self.kind} table")
        return SweepTable(self.kind, self.rows + other.rows)


def _row(first: float, psi2: float | None, b: Sequence[float], ra: Sequence[float], solver: SolverConfig):
    rep = compare(market_from_products(ra, b), solver)
    c, n = rep.centralized, rep.nash
    return SweepRow(
        delta_or_psi1=first,
        psi2=psi2,
        b_config=tuple(float(x) for x in b),
        Q_c=c.Q_star,
        P_c=c.P_star,
        gamma_c=c.gamma,
        U_c=c.total_utility,
        Q_n=n.Q_star,
        P_n=n.P_star,
        gamma_n=rep.gamma_n,
        U_n=n.total_utility,
        eta=rep.eta,
        Gamma=rep.capital_gamma,
    )


def delta_products(n_cps: int, delta: float, base: float = 2.0) -> np.ndarray:
    return base * np.arange(1, n_cps + 1, dtype=float) ** (-delta)


def run_delta_sweep(spec: DeltaSweepSpec, solver: SolverConfig = SolverConfig()) -> SweepTable:
    """Solve both regimes for every ``(delta, b)`` point with ``r = base n^-delta``, ``a = 1``.

    Raises:
        RuntimeError: if a point with ``base = 2`` is not interior, which
            cannot happen for a correct solver.
    """
    table = SweepTable("delta")
    for b in spec.b_configs:
        for delta in spec.delta_grid:
            ra = delta_products(spec.n_cps, delta, spec.base_coefficient)
            if spec.base_coefficient == 2.0 and not centralized_is_interior(market_from_products(ra, b)):
                raise RuntimeError(f"centralized optimum not interior at delta={delta}, b={b}")
            table.rows.append(_row(delta, None, b, ra, solver))
    return table


def run_psi_sweep(spec: PsiSweepSpec, solver: SolverConfig = SolverConfig()) -> SweepTable:
    table = SweepTable("psi")
    for psi1 in spec.psi1_grid:
        for psi2 in spec.psi2_grid:
            table.rows.append(_row(psi1, psi2, spec.b_config, (psi1, psi2), solver))
    return table


# --- trend checks --------------------------------------------------------------------


@dataclass(frozen=True)
class TrendResult:
    name: str
    passed: bool
    witness: SweepRow | None = None
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.detail}" if self.detail else ""
        return f"[{status}] {self.name}{extra}"


def _require(configs: Iterable[tuple[float, ...]], needed: Iterable[tuple[float, ...]]):
    missing = [c for c in needed if c not in set(configs)]
    if missing:
        raise ValueError(f"table lacks b configurations {missing}")


def _first_failure(name, pairs) -> TrendResult:
    for ok, row, detail in pairs:
        if not ok:
            return TrendResult(name, False, row, detail)
    return TrendResult(name, True)


def _ordering_configs(n: int):
    ones, twos = (1.0,) * n, (2.0,) * n
    k = (n + 1) // 2
    # "low b on the high-revenue CPs" and its mirror image
    low_first = (1.0,) * k + (2.0,) * (n - k)
    high_first = (2.0,) * k + (1.0,) * (n - k)
    return ones, twos, low_first, high_first


def _delta_trends(table: SweepTable) -> list[TrendResult]:
    results = []
    by_n = {n: [c for c in table.configs() if len(c) == n] for n in {len(c) for c in table.configs()}}
    for n, cfgs in sorted(by_n.items()):
        tag = f"N={n}"
        ones, twos, low_first, high_first = _ordering_configs(n)
        _require(cfgs, [ones, twos, low_first, high_first])

        def pairs():
            for cfg in cfgs:
                rows = table.select(cfg)
                for prev, cur in zip(rows, rows[1:]):
                    yield cur.Q_c <= prev.Q_c, cur, f"Q_c rose from {prev.Q_c} at delta={prev.delta_or_psi1}"

        results.append(_first_failure(f"{tag}: Q_c non-increasing in delta", pairs()))

        grouped = {}
        for r in table.rows:
            if r.n_cps == n:
                grouped.setdefault(r.delta_or_psi1, {})[r.b_config] = r

        def extreme(metric, cfg, pick):
            for d, rows in sorted(grouped.items()):
                vals = {c: getattr(r, metric) for c, r in rows.items()}
                target = vals[cfg]
                others = [v for c, v in vals.items() if c != cfg]
                ok = all(target < v for v in others) if pick == "min" else all(target > v for v in others)
                yield ok, rows[cfg], f"{metric} at delta={d}: {vals}"

        results.append(_first_failure(f"{tag}: Q_c lowest at b={list(twos)}", extreme("Q_c", twos, "min")))
        results.append(_first_failure(f"{tag}: P_c highest at b={list(twos)}", extreme("P_c", twos, "max")))
        results.append(_first_failure(f"{tag}: gamma_c highest at b={list(ones)}", extreme("gamma_c", ones, "max")))

        def low_vs_high():
            for d, rows in sorted(grouped.items()):
                lo, hi = rows[low_first], rows[high_first]
                ra = delta_products(n, d)
                if np.all(ra == ra[0]) and sorted(low_first) == sorted(high_first):
                    # identical revenues: the two configurations are permutations of each other
                    ok = math.isclose(lo.Q_c, hi.Q_c, rel_tol=1e-9)
                else:
                    ok = lo.Q_c > hi.Q_c
                yield ok, lo, f"delta={d}: Q_c {lo.Q_c} vs {hi.Q_c}"

        results.append(
            _first_failure(f"{tag}: Q_c higher for b={list(low_first)} than b={list(high_first)}", low_vs_high())
        )
    results.extend(_nash_trends(table))
    return results


def _nash_trends(table: SweepTable) -> list[TrendResult]:
    def pairs():
        for r in table.sorted_rows():
            if r.Q_n > 0 and r.n_cps >= 2:
                yield r.eta > 1 and r.Gamma > 1, r, f"eta={r.eta}, Gamma={r.Gamma}"

    return [_first_failure("eta > 1 and Gamma > 1 wherever Q_n > 0", pairs())]


def _psi_trends(table: SweepTable) -> list[TrendResult]:
    results = []

    def sentinel():
        for r in table.sorted_rows():
            b = np.array(r.b_config)
            threshold = max(np.array([r.delta_or_psi1, r.psi2]) - b * b / 2) <= 1.0
            yield math.isinf(r.eta) == threshold, r, f"eta={r.eta}, below threshold={threshold}"

    results.append(_first_failure("eta unbounded exactly where max(psi - b^2/2) <= 1", sentinel()))
    results.extend(_nash_trends(table))

    cfgs = table.configs()
    if (1.0, 1.0) in cfgs and (2.0, 2.0) in cfgs:
        strong = {(r.delta_or_psi1, r.psi2): r for r in table.select((2.0, 2.0))}

        def lower():
            for r in table.select((1.0, 1.0)):
                other = strong.get((r.delta_or_psi1, r.psi2))
                if other is None:
                    continue
                if all(math.isfinite(g) and g != 0 for g in (r.gamma_n, other.gamma_n)):
                    yield other.gamma_n < r.gamma_n, other, f"gamma_n {other.gamma_n} vs {r.gamma_n} at b=[1,1]"

        results.append(_first_failure("gamma_n lower for b=[2,2] than b=[1,1]", lower()))

    if (1.0, 1.0) in cfgs:
        results.append(_first_failure("gamma_n increasing in psi1 while CP 1 is the contributor", _gamma_n_rows((1.0, 1.0), table, leader_only=True)))
    return results


def _gamma_n_rows(cfg, table: SweepTable, leader_only: bool):
    rows = table.select(cfg)
    b = np.array(cfg)
    for psi2, line in groupby(sorted(rows, key=lambda r: (r.psi2, r.delta_or_psi1)), key=lambda r: r.psi2):
        line = list(line)
        for prev, cur in zip(line, line[1:]):
            if leader_only:
                # CP 1 sets Q_n only when its index ra - b^2/2 is the largest
                lead_prev = prev.delta_or_psi1 - b[0] ** 2 / 2 >= psi2 - b[1] ** 2 / 2
                if not (lead_prev and prev.Q_n > 0):
                    continue
            yield cur.gamma_n >= prev.gamma_n, cur, f"gamma_n fell from {prev.gamma_n} at psi1={prev.delta_or_psi1}, psi2={psi2}"


def gamma_n_nondecreasing_in_psi1(table: SweepTable, cfg=(1.0, 1.0)) -> TrendResult:
    """Whole-row check: gamma_n never decreases as psi1 grows with psi2 fixed."""
    return _first_failure("gamma_n non-decreasing in psi1 on every row", _gamma_n_rows(cfg, table, leader_only=False))


def assert_trends(table: SweepTable) -> list[TrendResult]:
    """Evaluate the qualitative trends of a sweep; each failure carries a witness row.

    Raises:
        ValueError: if a delta table lacks one of the required b configurations.
    """
    if table.kind == "delta":
        return _delta_trends(table)
    if table.kind == "psi":
        return _psi_trends(table)
    raise ValueError(f"unknown table kind {table.kind!r}")


# --- CSV -----------------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{v:.12g}"


def format_b(b: Sequence[float]) -> str:
    return "[" + ",".join(_fmt(x) for x in b) + "]"


def parse_b(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.strip("[]").split(","))


def write_csv(table: SweepTable, fh: TextIO) -> None:
    """Write the table to an open text stream, sorted by (delta_or_psi1, psi2, b_config)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in table.sorted_rows():
        writer.writerow(
            [_fmt(r.delta_or_psi1), _fmt(r.psi2), format_b(r.b_config)]
            + [_fmt(getattr(r, m)) for m in METRICS]
        )


def emit_csv(table: SweepTable, path: str | PathLike) -> None:
    with open(path, "w", newline="") as fh:
        write_csv(table, fh)


def read_csv(path: str | PathLike, kind: str) -> SweepTable:
    table = SweepTable(kind)
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            table.rows.append(
                SweepRow(
                    delta_or_psi1=float(rec["delta_or_psi1"]),
                    psi2=float(rec["psi2"]) if rec["psi2"] else None,
                    b_config=parse_b(rec["b_config"]),
                    **{m: float(rec[m]) for m in METRICS},
                )
            )
    return table
