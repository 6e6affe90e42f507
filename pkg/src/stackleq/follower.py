"""Follower best-response machinery: coupled two-time Riccati fields and feedback.

The follower's decoupling fields P(s, t), Z(s, t) solve, backward in s for
each fixed initial time t,

    -dP/ds = A'P + PA + Q2(s,t) + C'PC - [PB2 + C'PD2] S(s,s)^-1 [B2'Ph(s,s) + D2'P(s,s)C]
    -dZ/ds = A'Z + ZA + Qbar2(s,t) - Z B2 S(s,s)^-1 [B2'Ph(s,s) + D2'P(s,s)C]
    P(T,t) = M2(t),  Z(T,t) = Mbar2(t),  Ph = P + Z,
    S(s,s) = R2(s,s) + Rbar2(s,s) + D2'(s) P(s,s) D2(s),

which couple the value at (s, t) to the *diagonal* values at (s, s).  The
fields need not be symmetric.  Integration is explicit backward Euler on the
shared grid, sweeping rows s_k from T down and vectorizing over the t-columns;
the diagonal arguments are read at s_{k+1}, so every step is fully explicit.

Ph is maintained as P + Z; it is also integrated directly from its own
right-hand side as a cross-check, whose worst mismatch is reported on the
solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problem import GridSpec, ProblemSpec
from .twotime import TriField

__all__ = [
    "SolveOptions",
    "FollowerSolution",
    "FollowerCoefficients",
    "FollowerFeedback",
    "solve_follower_rdes",
    "assemble_follower_coefficients",
    "follower_feedback",
    "SingularS",
]

STATUS_SOLVED = "solved"
STATUS_ESCAPED = "escaped"
STATUS_SINGULAR = "singular"


class SingularS(np.linalg.LinAlgError):
    """The feedback weighting S(s, s) is numerically singular."""


@dataclass(frozen=True)
class SolveOptions:
    """Numerical knobs shared by both Riccati sweeps."""

    escape_bound: float = 1e8     # any field entry beyond this flags a finite escape
    eps_inv: float = 1e-8         # smallest |eigenvalue| accepted for S(s,s)
    eps_det: float = 1e-10        # determinant floor for the two nonsingularity monitors
    store_full: bool = True       # keep the full triangular fields
    column: int = 0               # designated column retained in reduced-memory mode


def _T(blocks: np.ndarray) -> np.ndarray:
    return np.swapaxes(blocks, -1, -2)


def _min_abs_eig(mat: np.ndarray) -> float:
    return float(np.min(np.abs(np.linalg.eigvals(mat))))


class _Escape(Exception):
    def __init__(self, k: int):
        self.k = k


class _SingularDiag(Exception):
    def __init__(self, k: int):
        self.k = k


class _NodeData:
    """Dynamics coefficients evaluated on the grid nodes."""

    def __init__(self, spec: ProblemSpec, grid: GridSpec):
        nodes = grid.nodes
        self.nodes = nodes
        self.A = spec.A.at_times(nodes)
        self.C = spec.C.at_times(nodes)
        self.B1 = spec.B1.at_times(nodes)
        self.D1 = spec.D1.at_times(nodes)
        self.B2 = spec.B2.at_times(nodes)
        self.D2 = spec.D2.at_times(nodes)
        if spec.R2.lag_only and spec.Rbar2.lag_only:
            zeros = np.zeros(nodes.size)
            self.Rhat2 = spec.R2.at_lags(zeros) + spec.Rbar2.at_lags(zeros)
        else:
            self.Rhat2 = np.stack([spec.R2.value(t, t) + spec.Rbar2.value(t, t)
                                   for t in nodes])


def _sweep_rows(spec: ProblemSpec, grid: GridSpec, opts: SolveOptions,
                track_phat: bool = False):
    """Generate follower rows (k, P_row, Z_row, Ph_direct_row) for k = N..0.

    Raises _Escape / _SingularDiag at the offending node.  The generator also
    exposes running cross-check data via the `stats` dict sent back on close;
    callers read `gen.stats` after exhaustion.
    """
    env = _NodeData(spec, grid)
    nodes, dt, N = env.nodes, grid.dt, grid.n_steps

    P_row = np.ascontiguousarray(spec.M2.at_times(nodes))
    Z_row = np.ascontiguousarray(spec.Mbar2.at_times(nodes))
    Ph_row = P_row + Z_row if track_phat else None

    stats = {"phat_residual": 0.0, "max_rhs": 0.0}

    yield N, P_row, Z_row, Ph_row, stats

    for k1 in range(N, 0, -1):
        s_index = k1
        A, C = env.A[s_index], env.C[s_index]
        B2, D2 = env.B2[s_index], env.D2[s_index]
        Pd = P_row[k1]
        Phd = Pd + Z_row[k1]
        S = env.Rhat2[s_index] + D2.T @ Pd @ D2
        if _min_abs_eig(S) < opts.eps_inv:
            raise _SingularDiag(k1)
        Wdiag = np.linalg.solve(S, B2.T @ Phd + D2.T @ Pd @ C)

        P = P_row[:k1]
        Z = Z_row[:k1]
        s = nodes[s_index]
        ts = nodes[:k1]
        Q2 = spec.Q2.row(s, ts)
        Qbar2 = spec.Qbar2.row(s, ts)

        AT_P = np.matmul(A.T, P)
        CT_P = np.matmul(C.T, P)
        gain_term = np.matmul(P, B2) + np.matmul(CT_P, D2)
        rhs_P = AT_P + np.matmul(P, A) + Q2 + np.matmul(CT_P, C) \
            - np.matmul(gain_term, Wdiag)
        rhs_Z = np.matmul(A.T, Z) + np.matmul(Z, A) + Qbar2 \
            - np.matmul(np.matmul(Z, B2), Wdiag)

        P_new = P + dt * rhs_P
        Z_new = Z + dt * rhs_Z

        if track_phat:
            Ph = Ph_row[:k1]
            rhs_Ph = np.matmul(A.T, Ph) + np.matmul(Ph, A) + Q2 + Qbar2 \
                + np.matmul(CT_P, C) \
                - np.matmul(np.matmul(Ph, B2) + np.matmul(CT_P, D2), Wdiag)
            Ph_row = Ph + dt * rhs_Ph
            stats["phat_residual"] = max(
                stats["phat_residual"],
                float(np.max(np.abs(P_new + Z_new - Ph_row))))
            stats["max_rhs"] = max(stats["max_rhs"],
                                   float(np.max(np.abs(rhs_P))) + float(np.max(np.abs(rhs_Z))))

        if not (np.all(np.isfinite(P_new)) and np.all(np.isfinite(Z_new))):
            raise _Escape(k1 - 1)
        if max(np.max(np.abs(P_new)), np.max(np.abs(Z_new))) > opts.escape_bound:
            raise _Escape(k1 - 1)

        P_row, Z_row = P_new, Z_new
        yield k1 - 1, P_row, Z_row, Ph_row, stats


@dataclass
class FollowerSolution:
    """Solved follower fields plus the diagonal data needed downstream."""

    grid: GridSpec
    status: str
    fail_index: int | None
    P: TriField | None
    Z: TriField | None
    Phat: TriField | None
    P_diag: np.ndarray
    Z_diag: np.ndarray
    Phat_diag: np.ndarray
    S_diag: np.ndarray
    P_sub: np.ndarray          # P(s_{k+1}, s_k), k = 0..N-1
    Z_sub: np.ndarray
    col_index: int
    P_col: np.ndarray | None
    Z_col: np.ndarray | None
    Phat_col: np.ndarray | None
    max_norms: dict[str, float]
    phat_residual: float
    max_rhs_norm: float

    @property
    def ok(self) -> bool:
        return self.status == STATUS_SOLVED


def solve_follower_rdes(spec: ProblemSpec, grid: GridSpec,
                        options: SolveOptions | None = None) -> FollowerSolution:
    """Backward-Euler sweep of the follower's coupled two-time Riccati fields.

    Returns a solution whose status is 'solved', 'escaped' (finite escape /
    blow-up past the escape bound) or 'singular' (S(s, s) not invertible).
    Partial fields are never reported as solved.
    """
    opts = options or SolveOptions()
    N = grid.n_steps
    n = spec.n
    j0 = opts.column
    if not 0 <= j0 <= N:
        raise ValueError(f"designated column {j0} outside grid")

    P_tf = TriField(grid, n, n) if opts.store_full else None
    Z_tf = TriField(grid, n, n) if opts.store_full else None
    Ph_tf = TriField(grid, n, n) if opts.store_full else None

    P_diag = np.full((N + 1, n, n), np.nan)
    Z_diag = np.full((N + 1, n, n), np.nan)
    P_sub = np.full((N, n, n), np.nan)
    Z_sub = np.full((N, n, n), np.nan)
    P_col = np.full((N + 1 - j0, n, n), np.nan)
    Z_col = np.full((N + 1 - j0, n, n), np.nan)
    max_norm = {"P": 0.0, "Z": 0.0}

    status, fail_index = STATUS_SOLVED, None
    stats = {"phat_residual": 0.0, "max_rhs": 0.0}
    try:
        for k, P_row, Z_row, Ph_row, stats in _sweep_rows(spec, grid, opts, track_phat=True):
            if opts.store_full:
                P_tf.set_row(k, P_row)
                Z_tf.set_row(k, Z_row)
                Ph_tf.set_row(k, P_row + Z_row)
            P_diag[k] = P_row[k]
            Z_diag[k] = Z_row[k]
            if k >= 1:
                P_sub[k - 1] = P_row[k - 1]
                Z_sub[k - 1] = Z_row[k - 1]
            if k >= j0:
                P_col[k - j0] = P_row[j0]
                Z_col[k - j0] = Z_row[j0]
            max_norm["P"] = max(max_norm["P"], float(np.max(np.abs(P_row))))
            max_norm["Z"] = max(max_norm["Z"], float(np.max(np.abs(Z_row))))
    except _Escape as exc:
        status, fail_index = STATUS_ESCAPED, exc.k
    except _SingularDiag as exc:
        status, fail_index = STATUS_SINGULAR, exc.k

    env = _NodeData(spec, grid)
    S_diag = env.Rhat2 + np.matmul(np.matmul(_T(env.D2), P_diag), env.D2)
    if status == STATUS_SOLVED:
        if _min_abs_eig(S_diag[0]) < opts.eps_inv:
            status, fail_index = STATUS_SINGULAR, 0

    solved = status == STATUS_SOLVED
    return FollowerSolution(
        grid=grid, status=status, fail_index=fail_index,
        P=P_tf if solved and opts.store_full else None,
        Z=Z_tf if solved and opts.store_full else None,
        Phat=Ph_tf if solved and opts.store_full else None,
        P_diag=P_diag, Z_diag=Z_diag, Phat_diag=P_diag + Z_diag, S_diag=S_diag,
        P_sub=P_sub, Z_sub=Z_sub,
        col_index=j0,
        P_col=P_col if solved else None,
        Z_col=Z_col if solved else None,
        Phat_col=(P_col + Z_col) if solved else None,
        max_norms=dict(max_norm),
        phat_residual=stats["phat_residual"],
        max_rhs_norm=stats["max_rhs"],
    )


# ----------------------------------------------------------------------
# Coefficient assembly (state-feedback building blocks)
# ----------------------------------------------------------------------

@dataclass
class FollowerFeedback:
    """Multipliers of the follower feedback v*(t) acting on x, u, h and l."""

    gain_x: np.ndarray  # m2 x n
    gain_u: np.ndarray  # m2 x m1
    gain_h: np.ndarray  # m2 x n
    gain_l: np.ndarray  # m2 x n


@dataclass
class FollowerCoefficients:
    """Node schedules and two-time symbol evaluators built on the solved fields.

    Node schedules (shape (N+1, ...)): S, H, Hbar, F, Fbar, G1, G2, G1bar,
    G2bar, plus the feedback gain schedules.  Two-time symbols (Htilde,
    Ftilde, K1, K2, K1bar, K2bar) are evaluated on demand from follower rows
    via `pair_blocks`; their diagonal schedules are precomputed.
    """

    spec: ProblemSpec
    grid: GridSpec
    sol: FollowerSolution
    options: SolveOptions
    # dynamics at nodes
    A: np.ndarray
    C: np.ndarray
    B1: np.ndarray
    D1: np.ndarray
    B2: np.ndarray
    D2: np.ndarray
    # node schedules
    S: np.ndarray
    H: np.ndarray
    Hbar: np.ndarray
    F: np.ndarray
    Fbar: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    G1bar: np.ndarray
    G2bar: np.ndarray
    U: np.ndarray
    gain_x: np.ndarray
    gain_u: np.ndarray
    gain_h: np.ndarray
    gain_l: np.ndarray
    # diagonal values of the two-time symbols
    Htilde_diag: np.ndarray
    Ftilde_diag: np.ndarray
    K1_diag: np.ndarray
    K2_diag: np.ndarray
    K1bar_diag: np.ndarray
    K2bar_diag: np.ndarray

    def pair_blocks(self, k: int, P_blocks: np.ndarray, Z_blocks: np.ndarray) -> dict:
        """Two-time symbols at (s_k, .) given stacks of P, Z blocks there."""
        A, C = self.A[k], self.C[k]
        B1, D1 = self.B1[k], self.D1[k]
        B2, D2 = self.B2[k], self.D2[k]
        ST = self.S[k].T
        UT = self.U[k].T
        PT = _T(P_blocks)
        ZT = _T(Z_blocks)
        bracket = np.matmul(B2.T, PT) + np.matmul(np.matmul(D2.T, PT), C)
        Wt = np.linalg.solve(ST, bracket)
        B2T_ZT = np.matmul(B2.T, ZT)
        STinv_B2T_ZT = np.linalg.solve(ST, B2T_ZT)
        return {
            "Htilde": A - np.matmul(B2, Wt),
            "Ftilde": C - np.matmul(D2, Wt),
            "K1": np.matmul(np.matmul(D1.T, PT), C) + np.matmul(B1.T, PT)
            - np.matmul(UT, bracket),
            "K2": np.matmul(B1.T, ZT) - np.matmul(UT, B2T_ZT),
            "K1bar": np.matmul(B2, STinv_B2T_ZT),
            "K2bar": np.matmul(D2, STinv_B2T_ZT),
        }

    def rows_desc(self):
        """Yield (k, P_row, Z_row, blocks) for k = N..0, descending.

        Reads the stored triangular fields when available, otherwise replays
        the backward sweep with rolling rows (reduced-memory mode).
        """
        if self.sol.P is not None:
            for k in range(self.grid.n_steps, -1, -1):
                P_row, Z_row = self.sol.P.row(k), self.sol.Z.row(k)
                yield k, P_row, Z_row, self.pair_blocks(k, P_row, Z_row)
        else:
            for k, P_row, Z_row, _, _ in _sweep_rows(self.spec, self.grid, self.options):
                yield k, P_row, Z_row, self.pair_blocks(k, P_row, Z_row)

    def at(self, k: int, j: int) -> dict:
        """Two-time symbols at the single pair (s_k, t_j); needs stored fields."""
        if self.sol.P is None:
            raise ValueError("pair access requires a fully stored follower solution")
        blocks = self.pair_blocks(k, self.sol.P.at(k, j)[None], self.sol.Z.at(k, j)[None])
        return {name: arr[0] for name, arr in blocks.items()}

    def column_blocks(self, j: int) -> dict:
        """Two-time symbols along the column t_j, k = j..N (uses stored columns)."""
        if self.sol.P is not None:
            P_col, Z_col = self.sol.P.column(j), self.sol.Z.column(j)
        elif j == self.sol.col_index:
            P_col, Z_col = self.sol.P_col, self.sol.Z_col
        else:
            raise ValueError(f"column {j} not retained in reduced-memory mode")
        names = ("Htilde", "Ftilde", "K1", "K2", "K1bar", "K2bar")
        collected = {name: [] for name in names}
        for i, k in enumerate(range(j, self.grid.n_steps + 1)):
            blk = self.pair_blocks(k, P_col[i][None], Z_col[i][None])
            for name in names:
                collected[name].append(blk[name][0])
        return {name: np.stack(vals) for name, vals in collected.items()}

    def feedback(self, k: int) -> FollowerFeedback:
        return FollowerFeedback(gain_x=self.gain_x[k], gain_u=self.gain_u[k],
                                gain_h=self.gain_h[k], gain_l=self.gain_l[k])


def assemble_follower_coefficients(spec: ProblemSpec, sol: FollowerSolution,
                                   grid: GridSpec,
                                   options: SolveOptions | None = None) -> FollowerCoefficients:
    """Evaluate every feedback building block on the grid from the solved fields."""
    if not sol.ok:
        raise ValueError(f"follower solve status is {sol.status!r}, not solved")
    opts = options or SolveOptions()
    env = _NodeData(spec, grid)
    A, C, B1, D1, B2, D2 = env.A, env.C, env.B1, env.D1, env.B2, env.D2

    S = sol.S_diag
    Pd, Phd, Zd = sol.P_diag, sol.Phat_diag, sol.Z_diag
    try:
        bracket = np.matmul(_T(B2), Phd) + np.matmul(np.matmul(_T(D2), Pd), C)
        W = np.linalg.solve(S, bracket)
        U = np.linalg.solve(S, np.matmul(np.matmul(_T(D2), Pd), D1))
        Sinv_B2T = np.linalg.solve(S, _T(B2))
        Sinv_D2T = np.linalg.solve(S, _T(D2))
        ST = _T(S)
        STinv_B2T = np.linalg.solve(ST, _T(B2))
        # diagonal values of the transposed-field symbols
        PdT, ZdT = _T(Pd), _T(Zd)
        bracketT = np.matmul(_T(B2), PdT) + np.matmul(np.matmul(_T(D2), PdT), C)
        WtT = np.linalg.solve(ST, bracketT)
        B2T_ZdT = np.matmul(_T(B2), ZdT)
        STinv_B2T_ZdT = np.linalg.solve(ST, B2T_ZdT)
    except np.linalg.LinAlgError as exc:
        raise SingularS(str(exc)) from exc

    UT = _T(U)
    return FollowerCoefficients(
        spec=spec, grid=grid, sol=sol, options=opts,
        A=A, C=C, B1=B1, D1=D1, B2=B2, D2=D2,
        S=S,
        H=A - np.matmul(B2, W),
        Hbar=C - np.matmul(D2, W),
        F=B1 - np.matmul(B2, U),
        Fbar=D1 - np.matmul(D2, U),
        G1=np.matmul(B2, Sinv_B2T),
        G2=np.matmul(B2, Sinv_D2T),
        G1bar=np.matmul(D2, STinv_B2T),
        G2bar=np.matmul(D2, Sinv_D2T),
        U=U,
        gain_x=-W,
        gain_u=-U,
        gain_h=-Sinv_B2T,
        gain_l=-Sinv_D2T,
        Htilde_diag=A - np.matmul(B2, WtT),
        Ftilde_diag=C - np.matmul(D2, WtT),
        K1_diag=np.matmul(np.matmul(_T(D1), PdT), C) + np.matmul(_T(B1), PdT)
        - np.matmul(UT, bracketT),
        K2_diag=np.matmul(_T(B1), ZdT) - np.matmul(UT, B2T_ZdT),
        K1bar_diag=np.matmul(B2, STinv_B2T_ZdT),
        K2bar_diag=np.matmul(D2, STinv_B2T_ZdT),
    )


def follower_feedback(coeffs: FollowerCoefficients, sol: FollowerSolution,
                      k: int) -> FollowerFeedback:
    """Feedback multipliers at node k: v*(t) = gain_x x + gain_u u + gain_h h + gain_l l."""
    if not sol.ok:
        raise ValueError(f"follower solve status is {sol.status!r}, not solved")
    return coeffs.feedback(k)
