"""Literature comparison schemes as fully-discrete update maps.

* MP: symplectic midpoint scheme for the (u, v) system (5-point centered).
* DVD: discrete-variational-derivative / AVF energy-conserving scheme.
* PS: multisymplectic box (Preissmann) scheme for the scalar equation,
  three time levels.
* FD4: fourth-order-in-space, second-order-in-time scalar scheme, three
  time levels (run with the squared time step by the benchmark driver).

The scalar schemes advance u only; for invariant monitoring, v is
reconstructed from the u history through the box form of the first
conservation law, mu_n D_m v = D_n mu_m u, integrated in x and anchored at
the left boundary node (flat far field on the soliton benchmarks).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .boussinesq import QuadPiece
from .integrators import MassODE, NewtonOptions, newton_solve
from .stencil import (GridSpec1D, apply_periodic, assemble_matrix, compose,
                      identity_op, make_dm, make_dmc, make_mum, make_shift)

__all__ = [
    "TwoLevelState",
    "build_mp",
    "build_dvd",
    "PSScheme",
    "FD4Scheme",
    "reconstruct_v",
]


@dataclass
class TwoLevelState:
    """u at the two newest time levels (three-level schemes use both)."""

    u_prev: np.ndarray
    u_cur: np.ndarray
    v_cur: np.ndarray | None = None


def _ops(grid: GridSpec1D):
    dx = grid.dx
    I = identity_op()
    S = make_shift(1)
    Sm1 = make_shift(-1)
    D = make_dm(dx)
    mum = make_mum()
    d2s = compose(compose(D, D), Sm1)
    return dx, I, S, Sm1, D, mum, d2s


def build_mp(grid: GridSpec1D) -> MassODE:
    """Semidiscretization whose midpoint-in-time map is the MP scheme:
    du/dt = Dc v,  dv/dt = Dc (u + u^2 - D^2 u_{-1})."""
    dx, I, S, Sm1, D, mum, d2s = _ops(grid)
    n = grid.n_nodes
    dc = make_dmc(dx)
    Dc = assemble_matrix(dc, n)
    Luv = Dc
    Lvu = assemble_matrix(compose(dc, I - d2s), n)
    quad = QuadPiece(Dc, sp.identity(n, format="csr"),
                     sp.identity(n, format="csr"), 1.0)
    return _system_ode(n, Luv, Lvu, [quad])


def build_dvd(grid: GridSpec1D) -> MassODE:
    """Semidiscretization whose AVF-in-time map is the DVD scheme:
    du/dt = D v,  dv/dt = D (u_{-1} + u_{-1}^2 - D^2 u_{-2})."""
    dx, I, S, Sm1, D, mum, d2s = _ops(grid)
    n = grid.n_nodes
    Dm = assemble_matrix(D, n)
    Sm1m = assemble_matrix(Sm1, n)
    Luv = Dm
    Lvu = assemble_matrix(compose(D, Sm1 - compose(d2s, Sm1)), n)
    quad = QuadPiece(Dm, Sm1m, Sm1m, 1.0)
    return _system_ode(n, Luv, Lvu, [quad])


def _system_ode(n, Luv, Lvu, quads) -> MassODE:
    M = sp.identity(2 * n, format="csr")
    z = sp.csr_matrix((n, n))

    def g(x, t=0.0):
        u, v = x[:n], x[n:]
        gv = Lvu @ u
        for q in quads:
            gv = gv + q.value(u)
        return np.concatenate([Luv @ v, gv])

    def jac(x, t=0.0):
        u = x[:n]
        Jvu = Lvu
        for q in quads:
            Jvu = Jvu + q.jac(u)
        return sp.bmat([[z, Luv], [Jvu, z]], format="csr")

    return MassODE(dim=2 * n, mass=M, g=g, jac_g=jac, poly_degree=2)


class PSScheme:
    """Multisymplectic box scheme, scalar in u, three time levels."""

    def __init__(self, grid: GridSpec1D, dt: float):
        dx, I, S, Sm1, D, mum, d2s = _ops(grid)
        Sm2 = make_shift(-2)
        D2 = compose(D, D)
        mu2 = compose(mum, mum)
        mu4 = compose(mu2, mu2)
        n = grid.n_nodes
        self.n, self.dt, self.grid = n, dt, grid
        self.A4 = assemble_matrix(compose(mu4, Sm2), n)
        self.L2 = assemble_matrix(compose(compose(D2, mu2), Sm2), n)
        self.X = assemble_matrix(compose(compose(D2, mum), Sm2), n)
        self.D4 = assemble_matrix(compose(compose(D2, D2), Sm2), n)
        self.W = assemble_matrix((I + S).scale(0.25), n)  # pair average in x

    def step(self, state: TwoLevelState, opts: NewtonOptions | None = None):
        up, uc, dt = state.u_prev, state.u_cur, self.dt
        w_old = self.W @ (up + uc)
        lin_lo = self.L2 @ (0.25 * up + 0.5 * uc)
        lin_hi = self.D4 @ (0.25 * up + 0.5 * uc)
        x_old = self.X @ (0.5 * w_old ** 2)

        def residual(un):
            w_new = self.W @ (uc + un)
            return (self.A4 @ (un - 2.0 * uc + up) / dt ** 2
                    - lin_lo - 0.25 * (self.L2 @ un)
                    - x_old - self.X @ (0.5 * w_new ** 2)
                    + lin_hi + 0.25 * (self.D4 @ un))

        def jacobian(un):
            w_new = self.W @ (uc + un)
            return (self.A4 / dt ** 2 - 0.25 * self.L2 + 0.25 * self.D4
                    - self.X @ (sp.diags(w_new) @ self.W))

        guess = 2.0 * uc - up
        return newton_solve(residual, jacobian, guess, opts)


class FD4Scheme:
    """Fourth-order-in-space scalar scheme, three time levels."""

    def __init__(self, grid: GridSpec1D, dt: float):
        dx, I, S, Sm1, D, mum, d2s = _ops(grid)
        Sm2 = make_shift(-2)
        D2 = compose(D, D)
        n = grid.n_nodes
        self.n, self.dt, self.grid = n, dt, grid
        P = I + (dx ** 2 / 12.0) * d2s
        self.P2 = assemble_matrix(compose(P, P), n)
        self.D2m = assemble_matrix(D2, n)
        self.PSm1 = assemble_matrix(compose(P, Sm1), n)
        self.Pm = assemble_matrix(P, n)
        self.Sm1m = assemble_matrix(Sm1, n)
        self.D2Sm2 = assemble_matrix(compose(D2, Sm2), n)

    def _h(self, ub):
        w = self.Sm1m @ ub
        return self.PSm1 @ ub + self.Pm @ (w * w) - self.D2Sm2 @ ub

    def step(self, state: TwoLevelState, opts: NewtonOptions | None = None):
        up, uc, dt = state.u_prev, state.u_cur, self.dt
        h_old = self._h(0.5 * (up + uc))

        def residual(un):
            return (self.P2 @ (un - 2.0 * uc + up) / dt ** 2
                    - self.D2m @ (0.5 * h_old + 0.5 * self._h(0.5 * (uc + un))))

        def jacobian(un):
            w = self.Sm1m @ (0.5 * (uc + un))
            dh = self.PSm1 + 2.0 * (self.Pm @ (sp.diags(w) @ self.Sm1m)) \
                - self.D2Sm2
            return self.P2 / dt ** 2 - 0.25 * (self.D2m @ dh)

        guess = 2.0 * uc - up
        return newton_solve(residual, jacobian, guess, opts)


def reconstruct_v(v_cur, u_cur, u_next, dt, grid: GridSpec1D) -> np.ndarray:
    """Advance the diagnostic v field of a scalar scheme one step.

    Solves mu_n D_m v = D_n mu_m u for v at the new level: integrate
    D_m v_next = 2 D_n mu_m u - D_m v_cur in x (cumulative sum, zero-mean
    adjusted), anchored at node 0, which sits in the flat far field.
    """
    dx = grid.dx
    mum = make_mum()
    dn_mu_u = apply_periodic(mum, (u_next - u_cur) / dt)
    dv_cur = apply_periodic(make_dm(dx), v_cur)
    r = 2.0 * dn_mu_u - dv_cur
    r = r - r.mean()
    v_next = np.empty_like(v_cur)
    v_next[0] = v_cur[0]
    v_next[1:] = v_cur[0] + dx * np.cumsum(r[:-1])
    return v_next
