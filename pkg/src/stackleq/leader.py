"""Leader equilibrium machinery on the 2n-dimensional augmented system.

Stacking the state x with the adjoint variation phi (and the follower's
backward pair into Y = (y, h), L = (z, l)) turns the leader's constrained
problem into an augmented linear system with block coefficients built from
the follower's feedback symbols.  Its decoupling fields Pcal(s,t), Zcal(s,t)
solve nonsymmetric coupled Riccati flows

    -dPcal/ds = Lambda1(s, t, Pcal, Zcal)
    -dZcal/ds = Lambda2(s, t, Pcal, Zcal)
    Pcal(T,t) = Mcal(t),  Zcal(T,t) = Mbarcal(t)

whose right-hand sides couple to the diagonal values Pcal(s,s), and which
require two nonsingularity conditions monitored during the sweep:
det(I - Pcal(s,t) Dbar(s)) != 0 at every pair, and the gain weighting
Rhat(t,t) + Bbar' [I - Pcal Dbar]^-1 Pcal Bbar invertible at every node.
The equilibrium gain is Pi(t,t) with u*(t) = -Pibar(t,t) x(t), Pibar being
the first n columns of Pi.

Integration follows the follower sweep exactly: explicit backward Euler,
rows of the shared triangular grid, diagonal arguments read at s_{k+1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .follower import (FollowerCoefficients, FollowerSolution, SolveOptions,
                       STATUS_ESCAPED, STATUS_SINGULAR, STATUS_SOLVED,
                       assemble_follower_coefficients, solve_follower_rdes, _T)
from .problem import GridSpec, ProblemSpec
from .twotime import TriField

__all__ = [
    "ShapeError",
    "LeaderCoefficients",
    "LeaderSolution",
    "ClosedLoopGains",
    "assemble_leader",
    "solve_leader_rdes",
    "leader_gain",
    "closed_loop_gains",
    "SolvedGame",
    "solve_game",
]

STATUS_SINGULAR_IPD = "singular_IPD"
STATUS_SINGULAR_RHAT = "singular_Rhat"


class ShapeError(ValueError):
    """An augmented block has the wrong dimensions."""


def _embed_diag(TL: np.ndarray, BR: np.ndarray) -> np.ndarray:
    """Block-diagonal embedding [[TL, 0], [0, BR]] over a leading batch axis."""
    TL, BR = np.asarray(TL), np.asarray(BR)
    lead = np.broadcast_shapes(TL.shape[:-2], BR.shape[:-2])
    n1, n2 = TL.shape[-1], BR.shape[-1]
    out = np.zeros(lead + (n1 + n2, n1 + n2))
    out[..., :n1, :n1] = TL
    out[..., n1:, n1:] = BR
    return out


def _embed_tl(TL: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros(TL.shape[:-2] + (d, d))
    n = TL.shape[-1]
    out[..., :n, :n] = TL
    return out


def _embed_br(BR: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros(BR.shape[:-2] + (d, d))
    n = BR.shape[-1]
    out[..., d - n:, d - n:] = BR
    return out


def _antidiag(TR: np.ndarray, BL: np.ndarray) -> np.ndarray:
    """[[0, TR], [BL, 0]] with square n x n blocks."""
    n = TR.shape[-1]
    out = np.zeros(TR.shape[:-2] + (2 * n, 2 * n))
    out[..., :n, n:] = TR
    out[..., n:, :n] = BL
    return out


def _stack_top(F: np.ndarray) -> np.ndarray:
    """[F; 0]: (..., n, m) -> (..., 2n, m)."""
    lead, (n, m) = F.shape[:-2], F.shape[-2:]
    out = np.zeros(lead + (2 * n, m))
    out[..., :n, :] = F
    return out


def _pad_left(K: np.ndarray, d: int) -> np.ndarray:
    """[0, K]: (..., m, n) -> (..., m, d) with zeros in the first d-n columns."""
    lead, (m, n) = K.shape[:-2], K.shape[-2:]
    out = np.zeros(lead + (m, d))
    out[..., :, d - n:] = K
    return out


@dataclass
class LeaderCoefficients:
    """Augmented block coefficients on the grid.

    Per-node blocks are dense arrays; the two-time blocks are assembled on
    demand from the follower's two-time symbols via `row_blocks`.
    """

    spec: ProblemSpec
    grid: GridSpec
    fcoeffs: FollowerCoefficients
    Bm: np.ndarray       # (N+1, 2n, m1)
    Bbar: np.ndarray
    Cm: np.ndarray       # (N+1, 2n, 2n)
    Cbar: np.ndarray
    Dm: np.ndarray
    Dbar: np.ndarray
    Rhat1_diag: np.ndarray   # (N+1, m1, m1)
    Mcal_nodes: np.ndarray   # (N+1, 2n, 2n): terminal Pcal(T, t_j)
    Mbarcal_nodes: np.ndarray
    A1_diag: np.ndarray      # diagonal values of the two-time blocks
    A1bar_diag: np.ndarray
    A2_diag: np.ndarray
    A2bar_diag: np.ndarray
    A2hat_diag: np.ndarray

    @property
    def dim(self) -> int:
        return 2 * self.spec.n

    def row_blocks(self, k: int, fb: dict) -> dict:
        """Two-time augmented blocks at (s_k, t_j), j = 0..k, stacked over j."""
        J = fb["Htilde"].shape[0]
        n, d = self.spec.n, self.dim
        s = self.grid.nodes[k]
        ts = self.grid.nodes[:J]
        H = np.broadcast_to(self.fcoeffs.H[k], (J, n, n))
        Hbar = np.broadcast_to(self.fcoeffs.Hbar[k], (J, n, n))
        return {
            "A1": _embed_diag(H, fb["Htilde"]),
            "A1bar": _embed_diag(Hbar, fb["Ftilde"]),
            "A2": _embed_br(-fb["K1bar"], d),
            "A2bar": _embed_br(-fb["K2bar"], d),
            "Q": _embed_tl(self.spec.Q1.row(s, ts), d),
            "Qbar": _embed_tl(self.spec.Qbar1.row(s, ts), d),
            "G": _pad_left(fb["K1"], d),
            "Gbar": _pad_left(fb["K2"], d),
        }

    def rows_desc(self):
        for k, _P_row, _Z_row, fb in self.fcoeffs.rows_desc():
            yield k, self.row_blocks(k, fb)

    def at(self, k: int, j: int) -> dict:
        fb = self.fcoeffs.at(k, j)
        blocks = self.row_blocks(k, {name: arr[None] for name, arr in fb.items()})
        return {name: arr[0] for name, arr in blocks.items()}


def assemble_leader(spec: ProblemSpec, fcoeffs: FollowerCoefficients,
                    grid: GridSpec) -> LeaderCoefficients:
    """Build the augmented per-node blocks and shape-check everything."""
    n, m1 = spec.n, spec.m1
    nodes = grid.nodes
    if fcoeffs.H.shape[-2:] != (n, n):
        raise ShapeError(f"follower H blocks have shape {fcoeffs.H.shape[-2:]}, expected {(n, n)}")
    if fcoeffs.F.shape[-2:] != (n, m1):
        raise ShapeError(f"follower F blocks have shape {fcoeffs.F.shape[-2:]}, expected {(n, m1)}")

    Bm = _stack_top(fcoeffs.F)
    Bbar = _stack_top(fcoeffs.Fbar)
    Cm = _antidiag(-fcoeffs.G1, _T(fcoeffs.G1))
    Cbar = _antidiag(-fcoeffs.G1bar, _T(fcoeffs.G2))
    Dm = _antidiag(-fcoeffs.G2, _T(fcoeffs.G1bar))
    Dbar = _antidiag(-fcoeffs.G2bar, _T(fcoeffs.G2bar))

    if spec.R1.lag_only and spec.Rbar1.lag_only:
        zeros = np.zeros(nodes.size)
        Rhat1 = spec.R1.at_lags(zeros) + spec.Rbar1.at_lags(zeros)
    else:
        Rhat1 = np.stack([spec.R1.value(t, t) + spec.Rbar1.value(t, t) for t in nodes])

    d = 2 * n
    A1_diag = _embed_diag(fcoeffs.H, fcoeffs.Htilde_diag)
    A1bar_diag = _embed_diag(fcoeffs.Hbar, fcoeffs.Ftilde_diag)
    A2_diag = _embed_br(-fcoeffs.K1bar_diag, d)
    A2bar_diag = _embed_br(-fcoeffs.K2bar_diag, d)

    lc = LeaderCoefficients(
        spec=spec, grid=grid, fcoeffs=fcoeffs,
        Bm=Bm, Bbar=Bbar, Cm=Cm, Cbar=Cbar, Dm=Dm, Dbar=Dbar,
        Rhat1_diag=Rhat1,
        Mcal_nodes=_embed_tl(spec.M1.at_times(nodes), d),
        Mbarcal_nodes=_embed_tl(spec.Mbar1.at_times(nodes), d),
        A1_diag=A1_diag, A1bar_diag=A1bar_diag,
        A2_diag=A2_diag, A2bar_diag=A2bar_diag,
        A2hat_diag=A1bar_diag + A2bar_diag,
    )
    for name, arr, shape in (("B", Bm, (d, m1)), ("Bbar", Bbar, (d, m1)),
                             ("C", Cm, (d, d)), ("Dbar", Dbar, (d, d)),
                             ("Rhat", Rhat1, (m1, m1))):
        if arr.shape[-2:] != shape:
            raise ShapeError(f"augmented block {name} has shape {arr.shape[-2:]}, expected {shape}")
    return lc


@dataclass
class LeaderSolution:
    """Solved augmented fields, gain schedules and nonsingularity records."""

    grid: GridSpec
    status: str
    fail_index: int | None
    fail_col: int | None
    Pcal: TriField | None
    Zcal: TriField | None
    Phatcal: TriField | None
    Pcal_diag: np.ndarray
    Zcal_diag: np.ndarray
    Phatcal_diag: np.ndarray
    Pcal_sub: np.ndarray
    Zcal_sub: np.ndarray
    col_index: int
    Pcal_col: np.ndarray | None
    Zcal_col: np.ndarray | None
    Phatcal_col: np.ndarray | None
    Pi: np.ndarray            # (N+1, m1, 2n): Pi(t, t)
    Lmat_diag: np.ndarray     # (N+1, 2n, 2n): X(t) -> L(t, t)
    min_det_ipd: float
    min_det_rhat: float
    max_norms: dict[str, float]
    phat_residual: float

    @property
    def ok(self) -> bool:
        return self.status == STATUS_SOLVED

    @property
    def Pibar(self) -> np.ndarray:
        """First n columns of Pi: u*(t) = -Pibar(t,t) x(t) since X(t) = (x(t), 0)."""
        n = self.Pi.shape[2] // 2
        return self.Pi[:, :, :n]


class _LeaderFail(Exception):
    def __init__(self, status: str, k: int, j: int | None = None):
        self.status = status
        self.k = k
        self.j = j


def _diag_gain(lcoeffs: LeaderCoefficients, k: int, Pd: np.ndarray, Zd: np.ndarray,
               eps_det: float):
    """Pi(s_k, s_k), the diagonal L-map, and the two monitored determinants."""
    d = lcoeffs.dim
    Dbar = lcoeffs.Dbar[k]
    Phd = Pd + Zd
    IPD = np.eye(d) - Pd @ Dbar
    det_ipd = float(abs(np.linalg.det(IPD)))
    if det_ipd < eps_det:
        raise _LeaderFail(STATUS_SINGULAR_IPD, k, k)
    WPd = np.linalg.solve(IPD, Pd)
    Bbar, Bm, Cbar = lcoeffs.Bbar[k], lcoeffs.Bm[k], lcoeffs.Cbar[k]
    Rg = lcoeffs.Rhat1_diag[k] + Bbar.T @ WPd @ Bbar
    det_rg = float(abs(np.linalg.det(Rg)))
    if det_rg < eps_det:
        raise _LeaderFail(STATUS_SINGULAR_RHAT, k)
    core = lcoeffs.A2hat_diag[k] + Cbar @ Phd
    Pi = np.linalg.solve(Rg, Bm.T @ Phd + Bbar.T @ WPd @ core)
    Lmat = WPd @ (core - Bbar @ Pi)
    return Pi, Lmat, det_ipd, det_rg


def solve_leader_rdes(spec: ProblemSpec, lcoeffs: LeaderCoefficients, grid: GridSpec,
                      options: SolveOptions | None = None) -> LeaderSolution:
    """Backward-Euler sweep of the leader's augmented coupled Riccati fields."""
    opts = options or SolveOptions()
    N = grid.n_steps
    d = lcoeffs.dim
    dt = grid.dt
    j0 = opts.column

    P_tf = TriField(grid, d, d) if opts.store_full else None
    Z_tf = TriField(grid, d, d) if opts.store_full else None
    Ph_tf = TriField(grid, d, d) if opts.store_full else None

    P_diag = np.full((N + 1, d, d), np.nan)
    Z_diag = np.full((N + 1, d, d), np.nan)
    P_sub = np.full((N, d, d), np.nan)
    Z_sub = np.full((N, d, d), np.nan)
    P_col = np.full((N + 1 - j0, d, d), np.nan)
    Z_col = np.full((N + 1 - j0, d, d), np.nan)
    Pi = np.full((N + 1, spec.m1, d), np.nan)
    Lmat_diag = np.full((N + 1, d, d), np.nan)
    max_norm = {"Pcal": 0.0, "Zcal": 0.0}
    min_det_ipd, min_det_rhat = np.inf, np.inf
    phat_residual = 0.0

    status, fail_index, fail_col = STATUS_SOLVED, None, None
    P_row = Z_row = Ph_row = None

    def record_row(k, P_row, Z_row):
        nonlocal min_det_ipd
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
        max_norm["Pcal"] = max(max_norm["Pcal"], float(np.max(np.abs(P_row))))
        max_norm["Zcal"] = max(max_norm["Zcal"], float(np.max(np.abs(Z_row))))
        # nonsingularity monitor at every stored pair
        dets = np.abs(np.linalg.det(np.eye(d) - np.matmul(P_row, lcoeffs.Dbar[k])))
        min_det_ipd = min(min_det_ipd, float(dets.min()))
        if dets.min() < opts.eps_det:
            raise _LeaderFail(STATUS_SINGULAR_IPD, k, int(np.argmin(dets)))

    try:
        fgen = lcoeffs.rows_desc()
        for k1 in range(N, -1, -1):
            k_got, blocks = next(fgen)
            if k_got != k1:
                raise RuntimeError("follower row stream out of sync")
            if k1 == N:
                P_row = lcoeffs.Mcal_nodes.copy()
                Z_row = lcoeffs.Mbarcal_nodes.copy()
                Ph_row = P_row + Z_row
                record_row(N, P_row, Z_row)

            Pi_k, Lmat_k, det_ipd, det_rg = _diag_gain(
                lcoeffs, k1, P_diag[k1], Z_diag[k1], opts.eps_det)
            Pi[k1] = Pi_k
            Lmat_diag[k1] = Lmat_k
            min_det_rhat = min(min_det_rhat, det_rg)

            if k1 == 0:
                break

            # step rows k1 -> k1-1: Lambda evaluated at (s_{k1}, t_j), j < k1
            P = P_row[:k1]
            Z = Z_row[:k1]
            Ph = Ph_row[:k1]
            A1 = blocks["A1"][:k1]
            A1bar = blocks["A1bar"][:k1]
            A2 = blocks["A2"][:k1]
            A2bar = blocks["A2bar"][:k1]
            Q = blocks["Q"][:k1]
            Qbar = blocks["Qbar"][:k1]
            G = blocks["G"][:k1]
            Gbar = blocks["Gbar"][:k1]
            Cm, Cbar = lcoeffs.Cm[k1], lcoeffs.Cbar[k1]
            Dm, Dbar = lcoeffs.Dm[k1], lcoeffs.Dbar[k1]
            Bm, Bbar = lcoeffs.Bm[k1], lcoeffs.Bbar[k1]

            IPD = np.eye(d) - np.matmul(P, Dbar)
            WP = np.linalg.solve(IPD, P)

            PhT = P + Z
            A1T = _T(A1)
            lam1 = np.matmul(A1T, P) + np.matmul(P, A1) + Q \
                + np.matmul(np.matmul(P, Cm), P) \
                + np.matmul(np.matmul(_T(A1bar) + np.matmul(P, Dm), WP),
                            A1bar - (Bbar @ Pi_k) + np.matmul(Cbar, P)) \
                - np.matmul(_T(G) + np.matmul(P, Bm), Pi_k)
            A2hat = A1bar + A2bar
            lam2 = np.matmul(A1T, Z) + np.matmul(_T(A2), PhT) + np.matmul(P, A2) \
                + np.matmul(Z, A1 + A2) + Qbar \
                + np.matmul(np.matmul(P, Cm), Z) + np.matmul(np.matmul(Z, Cm), PhT) \
                + np.matmul(np.matmul(_T(A1bar) + np.matmul(P, Dm), WP),
                            A2bar + np.matmul(Cbar, Z)) \
                + np.matmul(np.matmul(_T(A2bar) + np.matmul(Z, Dm), WP),
                            A2hat + np.matmul(Cbar, PhT) - (Bbar @ Pi_k)) \
                - np.matmul(_T(Gbar) + np.matmul(Z, Bm), Pi_k)

            P_new = P + dt * lam1
            Z_new = Z + dt * lam2
            Ph_new = Ph + dt * (lam1 + lam2)

            if not (np.all(np.isfinite(P_new)) and np.all(np.isfinite(Z_new))):
                raise _LeaderFail(STATUS_ESCAPED, k1 - 1)
            if max(np.max(np.abs(P_new)), np.max(np.abs(Z_new))) > opts.escape_bound:
                raise _LeaderFail(STATUS_ESCAPED, k1 - 1)

            phat_residual = max(phat_residual, float(np.max(np.abs(P_new + Z_new - Ph_new))))
            P_row, Z_row, Ph_row = P_new, Z_new, Ph_new
            record_row(k1 - 1, P_row, Z_row)
    except _LeaderFail as exc:
        status, fail_index, fail_col = exc.status, exc.k, exc.j

    solved = status == STATUS_SOLVED
    return LeaderSolution(
        grid=grid, status=status, fail_index=fail_index, fail_col=fail_col,
        Pcal=P_tf if solved and opts.store_full else None,
        Zcal=Z_tf if solved and opts.store_full else None,
        Phatcal=Ph_tf if solved and opts.store_full else None,
        Pcal_diag=P_diag, Zcal_diag=Z_diag, Phatcal_diag=P_diag + Z_diag,
        Pcal_sub=P_sub, Zcal_sub=Z_sub,
        col_index=j0,
        Pcal_col=P_col if solved else None,
        Zcal_col=Z_col if solved else None,
        Phatcal_col=(P_col + Z_col) if solved else None,
        Pi=Pi, Lmat_diag=Lmat_diag,
        min_det_ipd=float(min_det_ipd), min_det_rhat=float(min_det_rhat),
        max_norms=dict(max_norm), phat_residual=phat_residual,
    )


def leader_gain(lsol: LeaderSolution, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(Pi(t,t), Pibar(t,t)) at node k; u*(t) = -Pibar(t,t) x(t)."""
    if not lsol.ok:
        raise ValueError(f"leader solve status is {lsol.status!r}, not solved")
    return lsol.Pi[k], lsol.Pibar[k]


@dataclass
class ClosedLoopGains:
    """Per-node gain schedules of the equilibrium closed loop.

    u*(t) = Gamma_u(t) x(t), v*(t) = Gamma_v(t) x(t); the follower's backward
    pair enters through h(t) = Theta_h(t) x(t), l(t) = Theta_l(t) x(t) (the
    lower-left blocks of the diagonal decoupling maps), which turns the
    equilibrium dynamics into

      dx = (Psi - G1 Theta_h - G2 Theta_l) x ds + (Psibar - G1bar Theta_h - G2bar Theta_l) x dB
         = A_drift x ds + A_diff x dB.
    """

    grid: GridSpec
    Gamma_u: np.ndarray   # (N+1, m1, n)
    Gamma_v: np.ndarray   # (N+1, m2, n)
    Theta_h: np.ndarray   # (N+1, n, n)
    Theta_l: np.ndarray   # (N+1, n, n)
    Psi: np.ndarray       # (N+1, n, n)
    Psibar: np.ndarray
    A_drift: np.ndarray
    A_diff: np.ndarray


def closed_loop_gains(fsol: FollowerSolution, fcoeffs: FollowerCoefficients,
                      lsol: LeaderSolution, lcoeffs: LeaderCoefficients,
                      grid: GridSpec) -> ClosedLoopGains:
    """Eliminate (h, l) via the diagonal decoupling maps and compose all gains."""
    if not (fsol.ok and lsol.ok):
        raise ValueError("both solves must have status solved")
    n = fcoeffs.spec.n
    Pibar = lsol.Pibar
    Gamma_u = -Pibar
    Theta_h = lsol.Phatcal_diag[:, n:, :n]
    Theta_l = lsol.Lmat_diag[:, n:, :n]
    Gamma_v = fcoeffs.gain_x + np.matmul(fcoeffs.gain_u, Gamma_u) \
        + np.matmul(fcoeffs.gain_h, Theta_h) + np.matmul(fcoeffs.gain_l, Theta_l)
    Psi = fcoeffs.H - np.matmul(fcoeffs.F, Pibar)
    Psibar = fcoeffs.Hbar - np.matmul(fcoeffs.Fbar, Pibar)
    A_drift = Psi - np.matmul(fcoeffs.G1, Theta_h) - np.matmul(fcoeffs.G2, Theta_l)
    A_diff = Psibar - np.matmul(fcoeffs.G1bar, Theta_h) - np.matmul(fcoeffs.G2bar, Theta_l)
    return ClosedLoopGains(grid=grid, Gamma_u=Gamma_u, Gamma_v=Gamma_v,
                           Theta_h=Theta_h, Theta_l=Theta_l,
                           Psi=Psi, Psibar=Psibar, A_drift=A_drift, A_diff=A_diff)


@dataclass
class SolvedGame:
    """Full solve chain: follower fields, leader fields, closed-loop gains."""

    spec: ProblemSpec
    grid: GridSpec
    options: SolveOptions
    follower: FollowerSolution
    fcoeffs: FollowerCoefficients | None
    lcoeffs: LeaderCoefficients | None
    leader: LeaderSolution | None
    gains: ClosedLoopGains | None

    @property
    def ok(self) -> bool:
        return self.follower.ok and self.leader is not None and self.leader.ok

    @property
    def status(self) -> str:
        if not self.follower.ok:
            return f"follower:{self.follower.status}"
        if self.leader is None or not self.leader.ok:
            return f"leader:{self.leader.status if self.leader else 'not-run'}"
        return STATUS_SOLVED


def solve_game(spec: ProblemSpec, grid: GridSpec,
               options: SolveOptions | None = None) -> SolvedGame:
    """Run the full pipeline: follower sweep, leader sweep, gain extraction."""
    opts = options or SolveOptions()
    fsol = solve_follower_rdes(spec, grid, opts)
    if not fsol.ok:
        return SolvedGame(spec, grid, opts, fsol, None, None, None, None)
    fcoeffs = assemble_follower_coefficients(spec, fsol, grid, opts)
    lcoeffs = assemble_leader(spec, fcoeffs, grid)
    lsol = solve_leader_rdes(spec, lcoeffs, grid, opts)
    if not lsol.ok:
        return SolvedGame(spec, grid, opts, fsol, fcoeffs, lcoeffs, lsol, None)
    gains = closed_loop_gains(fsol, fcoeffs, lsol, lcoeffs, grid)
    return SolvedGame(spec, grid, opts, fsol, fcoeffs, lcoeffs, lsol, gains)
