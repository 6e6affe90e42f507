"""Game data model: dynamics coefficients, two-time cost kernels, grids, presets.

The game couples a controlled linear SDE

    dx(s) = [A(s)x + B1(s)u + B2(s)v] ds + [C(s)x + D1(s)u + D2(s)v] dB(s)

with quadratic objectives whose weights are *two-time* kernels K(s, t): the
running weight seen at time s depends on the evaluation (initial) time t,
e.g. hyperbolic discounting K(s, t) = (a + b(s-t))^(-c) * K0.  Terminal
weights M(t) depend on the initial time only.  This initial-time dependence,
together with the mean-field (conditional-expectation) cost terms, is what
makes the game time inconsistent.

`validate` checks the standing positivity assumptions on a grid:
Q_i >= 0, Q_i + Qbar_i >= 0, M_i >= 0, M_i + Mbar_i >= 0 (semidefinite),
R_i > 0, R_i + Rbar_i > 0 (definite), for i = 1 (leader), 2 (follower).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Kernel",
    "TerminalWeight",
    "Coefficient",
    "GridSpec",
    "ProblemSpec",
    "ConditionCheck",
    "ValidationReport",
    "validate",
    "case1",
    "case2",
    "preset",
    "PRESET_NAMES",
    "load_problem",
    "problem_from_dict",
    "problem_to_dict",
    "NonSymmetricKernel",
    "GridMismatch",
    "DomainError",
]

_NODE_TOL = 1e-9


class NonSymmetricKernel(ValueError):
    """A cost kernel or terminal weight is not symmetric within tolerance."""


class GridMismatch(ValueError):
    """Grid step does not divide the horizon, or a time is off-grid."""


class DomainError(ValueError):
    """Kernel evaluated outside its domain (s < t, or nonpositive power base)."""


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a matrix, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Kernel:
    """Two-time matrix kernel K(s, t), defined for t <= s.

    kind:
      - "constant":  K(s, t) = base
      - "powerlaw":  K(s, t) = (a + b*(s - t))**(-c) * base, a > 0
      - "table":     values stored on a shared grid, K(s_k, t_j) = table[k, j]
    """

    kind: str
    base: np.ndarray
    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    times: np.ndarray | None = field(default=None, repr=False)
    table: np.ndarray | None = field(default=None, repr=False)

    @staticmethod
    def constant(value) -> "Kernel":
        return Kernel(kind="constant", base=_as_matrix(value, "kernel value"))

    @staticmethod
    def powerlaw(a: float, b: float, c: float, base) -> "Kernel":
        if a <= 0.0:
            raise DomainError(f"powerlaw kernel requires a > 0, got a={a}")
        return Kernel(kind="powerlaw", base=_as_matrix(base, "kernel base"),
                      a=float(a), b=float(b), c=float(c))

    @staticmethod
    def tabulated(times, values) -> "Kernel":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:  # scalar kernel stored as (K, K)
            values = values[:, :, None, None]
        if values.ndim != 4 or values.shape[0] != times.size or values.shape[1] != times.size:
            raise ValueError("tabulated kernel needs values of shape (K, K, r, r)")
        return Kernel(kind="table", base=_as_matrix(values[-1, -1], "kernel value"),
                      times=times, table=values)

    @staticmethod
    def zero(dim: int) -> "Kernel":
        return Kernel.constant(np.zeros((dim, dim)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.base.shape

    @property
    def lag_only(self) -> bool:
        """True when K(s, t) depends on (s, t) through the lag s - t only."""
        return self.kind in ("constant", "powerlaw")

    @property
    def is_zero(self) -> bool:
        if self.kind == "table":
            return not np.any(self.table)
        return not np.any(self.base)

    def _scale(self, lags: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.ones_like(lags)
        factor = self.a + self.b * lags
        if np.any(factor <= 0.0):
            raise DomainError(
                f"powerlaw kernel base factor nonpositive at lag {lags[factor <= 0.0].min()}")
        return factor ** (-self.c)

    def _table_index(self, t: float) -> int:
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > _NODE_TOL * max(1.0, abs(t)):
            raise GridMismatch(f"time {t} is not a node of the tabulated kernel")
        return idx

    def at_lags(self, lags) -> np.ndarray:
        """Evaluate on an array of lags s - t >= 0 (lag-only kinds)."""
        if not self.lag_only:
            raise ValueError("at_lags is only defined for constant/powerlaw kernels")
        lags = np.asarray(lags, dtype=float)
        return self._scale(lags)[:, None, None] * self.base

    def row(self, s: float, ts) -> np.ndarray:
        """Evaluate K(s, t) for an array of t <= s; returns (len(ts), r, r)."""
        ts = np.asarray(ts, dtype=float)
        if np.any(ts > s + _NODE_TOL):
            raise DomainError(f"kernel evaluated at t > s (s={s})")
        if self.kind == "table":
            k = self._table_index(s)
            js = [self._table_index(t) for t in ts]
            return self.table[k, js]
        return self.at_lags(np.maximum(s - ts, 0.0))

    def value(self, s: float, t: float) -> np.ndarray:
        """Evaluate K(s, t) at a single pair, t <= s."""
        return self.row(s, np.array([t]))[0]

    def asym(self) -> float:
        """Worst symmetry defect of the stored data."""
        if self.kind == "table":
            return float(np.max(np.abs(self.table - np.swapaxes(self.table, -1, -2))))
        return float(np.max(np.abs(self.base - self.base.T)))


@dataclass(frozen=True)
class TerminalWeight:
    """Terminal cost weight M(t); constant or quadratic in the initial time."""

    kind: str  # "constant" | "quadratic_t"
    base: np.ndarray
    coeff: float = 0.0

    @staticmethod
    def constant(value) -> "TerminalWeight":
        return TerminalWeight(kind="constant", base=_as_matrix(value, "terminal weight"))

    @staticmethod
    def quadratic(coeff: float, dim: int, base=None) -> "TerminalWeight":
        """M(t) = coeff * t**2 * base, base defaulting to the identity."""
        mat = np.eye(dim) if base is None else _as_matrix(base, "terminal base")
        return TerminalWeight(kind="quadratic_t", base=mat, coeff=float(coeff))

    @staticmethod
    def zero(dim: int) -> "TerminalWeight":
        return TerminalWeight.constant(np.zeros((dim, dim)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.base.shape

    @property
    def is_zero(self) -> bool:
        if self.kind == "quadratic_t":
            return self.coeff == 0.0 or not np.any(self.base)
        return not np.any(self.base)

    def value(self, t: float) -> np.ndarray:
        if self.kind == "constant":
            return self.base
        return self.coeff * t * t * self.base

    def at_times(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self.kind == "constant":
            return np.broadcast_to(self.base, (ts.size,) + self.base.shape)
        return (self.coeff * ts * ts)[:, None, None] * self.base

    def asym(self) -> float:
        return float(np.max(np.abs(self.base - self.base.T)))


@dataclass(frozen=True)
class Coefficient:
    """Time-indexed dynamics coefficient: constant or tabulated on nodes."""

    values: np.ndarray
    times: np.ndarray | None = field(default=None, repr=False)

    @staticmethod
    def constant(value) -> "Coefficient":
        return Coefficient(values=_as_matrix(value, "coefficient"))

    @staticmethod
    def tabulated(times, values) -> "Coefficient":
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.ndim != 3 or values.shape[0] != times.size:
            raise ValueError("tabulated coefficient needs values of shape (K, r, c)")
        return Coefficient(values=values, times=times)

    @property
    def constant_valued(self) -> bool:
        return self.times is None

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape[-2:]

    def value(self, t: float) -> np.ndarray:
        if self.constant_valued:
            return self.values
        # linear interpolation between tabulated nodes
        idx = np.clip(np.searchsorted(self.times, t), 1, self.times.size - 1)
        t0, t1 = self.times[idx - 1], self.times[idx]
        w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
        return (1.0 - w) * self.values[idx - 1] + w * self.values[idx]

    def at_times(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if self.constant_valued:
            return np.broadcast_to(self.values, (ts.size,) + self.values.shape)
        return np.stack([self.value(t) for t in ts])


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid t_k = t0 + k*dt, k = 0..n_steps, shared by both time axes.

    The s-grid and t-grid coincide so that diagonal values F(s, s) used by the
    backward recursions are always grid nodes.
    """

    t0: float
    T: float
    dt: float

    def __post_init__(self):
        if self.T <= self.t0:
            raise GridMismatch(f"need T > t0, got t0={self.t0}, T={self.T}")
        if self.dt <= 0.0:
            raise GridMismatch(f"need dt > 0, got {self.dt}")
        steps = (self.T - self.t0) / self.dt
        if abs(steps - round(steps)) > 1e-6:
            raise GridMismatch(
                f"horizon {self.T - self.t0} is not an integer multiple of dt={self.dt}")
        if round(steps) < 2:
            raise GridMismatch("grid needs at least 2 steps")

    @property
    def n_steps(self) -> int:
        return int(round((self.T - self.t0) / self.dt))

    @property
    def nodes(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    def index_of(self, t: float) -> int:
        k = (t - self.t0) / self.dt
        if abs(k - round(k)) > 1e-6 or not (0 <= round(k) <= self.n_steps):
            raise GridMismatch(f"time {t} is not a grid node")
        return int(round(k))

    def refine(self, factor: int) -> "GridSpec":
        return GridSpec(self.t0, self.T, self.dt / factor)

    def coarsen(self, factor: int) -> "GridSpec":
        return GridSpec(self.t0, self.T, self.dt * factor)


@dataclass(frozen=True)
class ProblemSpec:
    """All model coefficients and cost data of the two-player game."""

    n: int
    m1: int
    m2: int
    t0: float
    T: float
    A: Coefficient
    C: Coefficient
    B1: Coefficient
    D1: Coefficient
    B2: Coefficient
    D2: Coefficient
    Q1: Kernel
    Qbar1: Kernel
    Q2: Kernel
    Qbar2: Kernel
    R1: Kernel
    Rbar1: Kernel
    R2: Kernel
    Rbar2: Kernel
    M1: TerminalWeight
    Mbar1: TerminalWeight
    M2: TerminalWeight
    Mbar2: TerminalWeight
    x0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))
        expected = {
            "A": (self.n, self.n), "C": (self.n, self.n),
            "B1": (self.n, self.m1), "D1": (self.n, self.m1),
            "B2": (self.n, self.m2), "D2": (self.n, self.m2),
            "Q1": (self.n, self.n), "Qbar1": (self.n, self.n),
            "Q2": (self.n, self.n), "Qbar2": (self.n, self.n),
            "R1": (self.m1, self.m1), "Rbar1": (self.m1, self.m1),
            "R2": (self.m2, self.m2), "Rbar2": (self.m2, self.m2),
            "M1": (self.n, self.n), "Mbar1": (self.n, self.n),
            "M2": (self.n, self.n), "Mbar2": (self.n, self.n),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{name} has shape {got}, expected {shape}")
        if self.x0.shape != (self.n,):
            raise ValueError(f"x0 has shape {self.x0.shape}, expected ({self.n},)")
        if self.T <= self.t0:
            raise ValueError(f"need T > t0, got t0={self.t0}, T={self.T}")

    def grid(self, dt: float) -> GridSpec:
        return GridSpec(self.t0, self.T, dt)

    def kernels(self) -> dict[str, Kernel]:
        return {name: getattr(self, name)
                for name in ("Q1", "Qbar1", "Q2", "Qbar2", "R1", "Rbar1", "R2", "Rbar2")}

    def terminals(self) -> dict[str, TerminalWeight]:
        return {name: getattr(self, name) for name in ("M1", "Mbar1", "M2", "Mbar2")}


# ----------------------------------------------------------------------
# Validation of the standing positivity assumptions
# ----------------------------------------------------------------------

@dataclass
class ConditionCheck:
    name: str
    passed: bool
    min_eigenvalue: float
    worst_s: float
    worst_t: float
    message: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "min_eigenvalue": float(self.min_eigenvalue),
            "worst_s": float(self.worst_s),
            "worst_t": float(self.worst_t),
            "message": self.message,
        }


@dataclass
class ValidationReport:
    conditions: list[ConditionCheck]
    eps_pd: float
    dt: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failures(self) -> list[ConditionCheck]:
        return [c for c in self.conditions if not c.passed]

    def as_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "eps_pd": self.eps_pd,
            "dt": self.dt,
            "conditions": [c.as_dict() for c in self.conditions],
        }

    def __str__(self) -> str:
        lines = []
        for c in self.conditions:
            status = "pass" if c.passed else "FAIL"
            lines.append(f"  [{status}] {c.name}: min eig {c.min_eigenvalue:.3e} "
                         f"at (s={c.worst_s:.4g}, t={c.worst_t:.4g})")
        lines.append(f"assumption check: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _min_eig_blocks(blocks: np.ndarray) -> tuple[float, int]:
    """Smallest eigenvalue over a stack of symmetric blocks, with its index."""
    if blocks.shape[-1] == 1:
        vals = blocks[..., 0, 0]
    else:
        sym = 0.5 * (blocks + np.swapaxes(blocks, -1, -2))
        vals = np.linalg.eigvalsh(sym)[..., 0]
    idx = int(np.argmin(vals))
    return float(vals[idx]), idx


def _scan_pair_condition(k1: Kernel, k2: Kernel | None, grid: GridSpec):
    """Min eigenvalue of k1 (+ k2) over all grid pairs (s_k, t_j), t_j <= s_k.

    For lag-only kernels every pair value is attained on the lag ladder
    d*dt, d = 0..n_steps, so an O(N) scan is exact; otherwise the full
    triangle is scanned row by row.
    """
    nodes = grid.nodes
    lag_only = k1.lag_only and (k2 is None or k2.lag_only)
    if lag_only:
        lags = grid.dt * np.arange(grid.n_steps + 1)
        blocks = k1.at_lags(lags)
        if k2 is not None:
            blocks = blocks + k2.at_lags(lags)
        val, idx = _min_eig_blocks(blocks)
        # representative pair attaining the worst lag
        return val, nodes[idx], nodes[0]
    best = np.inf
    best_pair = (nodes[0], nodes[0])
    for k in range(grid.n_steps + 1):
        blocks = k1.row(nodes[k], nodes[: k + 1])
        if k2 is not None:
            blocks = blocks + k2.row(nodes[k], nodes[: k + 1])
        val, j = _min_eig_blocks(blocks)
        if val < best:
            best, best_pair = val, (nodes[k], nodes[j])
    return best, best_pair[0], best_pair[1]


def validate(spec: ProblemSpec, grid: GridSpec, eps_pd: float = 1e-10,
             sym_tol: float = 1e-12) -> ValidationReport:
    """Check the standing positivity assumptions at every grid pair.

    Raises NonSymmetricKernel when any kernel or terminal weight has a
    symmetry defect above sym_tol; positivity failures are reported, not
    raised.  Strict positivity means smallest eigenvalue > eps_pd.
    """
    if abs(grid.T - spec.T) > _NODE_TOL:
        raise GridMismatch(f"grid horizon T={grid.T} does not match problem T={spec.T}")
    for name, ker in {**spec.kernels(), **spec.terminals()}.items():
        if ker.asym() > sym_tol:
            raise NonSymmetricKernel(f"{name} violates symmetry by {ker.asym():.3e}")

    checks: list[ConditionCheck] = []
    nodes = grid.nodes
    for i, (q, qbar, r, rbar, m, mbar) in enumerate(
            ((spec.Q1, spec.Qbar1, spec.R1, spec.Rbar1, spec.M1, spec.Mbar1),
             (spec.Q2, spec.Qbar2, spec.R2, spec.Rbar2, spec.M2, spec.Mbar2)), start=1):
        for label, first, second, strict in (
                (f"Q{i} >= 0", q, None, False),
                (f"Q{i}+Qbar{i} >= 0", q, qbar, False),
                (f"R{i} > 0", r, None, True),
                (f"R{i}+Rbar{i} > 0", r, rbar, True)):
            val, ws, wt = _scan_pair_condition(first, second, grid)
            ok = val > eps_pd if strict else val >= -eps_pd
            msg = "" if ok else f"{label.split(' ')[0]} not positive {'definite' if strict else 'semidefinite'}"
            checks.append(ConditionCheck(label, ok, val, ws, wt, msg))
        for label, weights in ((f"M{i} >= 0", m.at_times(nodes)),
                               (f"M{i}+Mbar{i} >= 0", m.at_times(nodes) + mbar.at_times(nodes))):
            val, idx = _min_eig_blocks(weights)
            ok = val >= -eps_pd
            msg = "" if ok else f"{label.split(' ')[0]} not positive semidefinite"
            checks.append(ConditionCheck(label, ok, val, nodes[idx], nodes[idx], msg))

    return ValidationReport(conditions=checks, eps_pd=eps_pd, dt=grid.dt)


# ----------------------------------------------------------------------
# Presets and JSON problem files
# ----------------------------------------------------------------------

PRESET_NAMES = ("case1", "case2")


def case1() -> ProblemSpec:
    """Scalar resource-allocation game with hyperbolic discounting, drift-only controls."""
    one = np.ones((1, 1))
    return ProblemSpec(
        n=1, m1=1, m2=1, t0=0.1, T=2.2,
        A=Coefficient.constant(-1.6), C=Coefficient.constant(0.5),
        B1=Coefficient.constant(-0.3), D1=Coefficient.constant(0.0),
        B2=Coefficient.constant(1.0), D2=Coefficient.constant(0.0),
        Q1=Kernel.powerlaw(5.0, 1.2, 1.2, one), Qbar1=Kernel.constant(2.0 * one),
        Q2=Kernel.powerlaw(10.0, 0.8, 0.5, one), Qbar2=Kernel.constant(2.0 * one),
        R1=Kernel.powerlaw(1.0, 0.7, 1.8, one), Rbar1=Kernel.zero(1),
        R2=Kernel.powerlaw(1.0, 0.2, 0.3, one), Rbar2=Kernel.zero(1),
        M1=TerminalWeight.quadratic(1.3, 1), Mbar1=TerminalWeight.quadratic(1.3, 1),
        M2=TerminalWeight.quadratic(2.1, 1), Mbar2=TerminalWeight.quadratic(2.1, 1),
        x0=np.array([1.0]),
    )


def case2() -> ProblemSpec:
    """Variant with controlled diffusion (D1, D2 nonzero) and mean-field control costs."""
    one = np.ones((1, 1))
    return ProblemSpec(
        n=1, m1=1, m2=1, t0=0.1, T=1.6,
        A=Coefficient.constant(-1.6), C=Coefficient.constant(0.5),
        B1=Coefficient.constant(-0.3), D1=Coefficient.constant(0.7),
        B2=Coefficient.constant(1.0), D2=Coefficient.constant(0.2),
        Q1=Kernel.powerlaw(5.0, 1.2, 1.2, one), Qbar1=Kernel.constant(2.0 * one),
        Q2=Kernel.powerlaw(10.0, 0.8, 0.5, one), Qbar2=Kernel.powerlaw(0.7, 3.1, 1.3, one),
        R1=Kernel.powerlaw(1.0, 0.7, 1.8, one), Rbar1=Kernel.powerlaw(20.0, 3.7, 0.1, one),
        R2=Kernel.powerlaw(1.0, 0.2, 0.3, one), Rbar2=Kernel.constant(25.0 * one),
        M1=TerminalWeight.quadratic(1.3, 1), Mbar1=TerminalWeight.quadratic(1.3, 1),
        M2=TerminalWeight.quadratic(2.1, 1), Mbar2=TerminalWeight.quadratic(2.1, 1),
        x0=np.array([1.0]),
    )


def preset(name: str) -> ProblemSpec:
    if name == "case1":
        return case1()
    if name == "case2":
        return case2()
    raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")


def _kernel_to_dict(k: Kernel) -> dict:
    if k.kind == "constant":
        return {"kind": "constant", "value": k.base.tolist()}
    if k.kind == "powerlaw":
        return {"kind": "powerlaw", "a": k.a, "b": k.b, "c": k.c, "base": k.base.tolist()}
    return {"kind": "table", "times": k.times.tolist(), "values": k.table.tolist()}


def _kernel_from_dict(d: dict) -> Kernel:
    kind = d["kind"]
    if kind == "constant":
        return Kernel.constant(d["value"])
    if kind == "powerlaw":
        return Kernel.powerlaw(d["a"], d["b"], d["c"], d["base"])
    if kind == "table":
        return Kernel.tabulated(d["times"], d["values"])
    raise ValueError(f"unknown kernel kind {kind!r}")


def _terminal_to_dict(m: TerminalWeight) -> dict:
    if m.kind == "constant":
        return {"kind": "constant", "value": m.base.tolist()}
    return {"kind": "quadratic_t", "coeff": m.coeff, "base": m.base.tolist()}


def _terminal_from_dict(d: dict, dim: int) -> TerminalWeight:
    if d["kind"] == "constant":
        return TerminalWeight.constant(d["value"])
    if d["kind"] == "quadratic_t":
        return TerminalWeight.quadratic(d["coeff"], dim, d.get("base"))
    raise ValueError(f"unknown terminal weight kind {d['kind']!r}")


def _coefficient_to_obj(c: Coefficient):
    if c.constant_valued:
        return c.values.tolist()
    return {"kind": "table", "times": c.times.tolist(), "values": c.values.tolist()}


def _coefficient_from_obj(obj) -> Coefficient:
    if isinstance(obj, dict):
        return Coefficient.tabulated(obj["times"], obj["values"])
    return Coefficient.constant(obj)


def problem_to_dict(spec: ProblemSpec) -> dict:
    return {
        "dims": {"n": spec.n, "m1": spec.m1, "m2": spec.m2},
        "horizon": {"t0": spec.t0, "T": spec.T},
        "dynamics": {name: _coefficient_to_obj(getattr(spec, name))
                     for name in ("A", "B1", "B2", "C", "D1", "D2")},
        "costs": {name: _kernel_to_dict(k) for name, k in spec.kernels().items()},
        "terminal": {name: _terminal_to_dict(m) for name, m in spec.terminals().items()},
        "x0": spec.x0.tolist(),
    }


def problem_from_dict(d: dict) -> ProblemSpec:
    dims = d["dims"]
    n = int(dims["n"])
    return ProblemSpec(
        n=n, m1=int(dims["m1"]), m2=int(dims["m2"]),
        t0=float(d["horizon"]["t0"]), T=float(d["horizon"]["T"]),
        **{name: _coefficient_from_obj(d["dynamics"][name])
           for name in ("A", "B1", "B2", "C", "D1", "D2")},
        **{name: _kernel_from_dict(d["costs"][name]) for name in
           ("Q1", "Qbar1", "Q2", "Qbar2", "R1", "Rbar1", "R2", "Rbar2")},
        **{name: _terminal_from_dict(d["terminal"][name], n) for name in
           ("M1", "Mbar1", "M2", "Mbar2")},
        x0=np.asarray(d["x0"], dtype=float),
    )


def load_problem(path: str | Path) -> ProblemSpec:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))


def save_problem(spec: ProblemSpec, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")
