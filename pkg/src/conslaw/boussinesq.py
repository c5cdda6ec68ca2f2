"""Semidiscrete systems for the four Boussinesq scheme families.

The Boussinesq system u_t = v_x, v_t = (u + u^2 - u_xx)_x is semidiscretized
in divergence form: each family supplies flux/density pairs so that

    d/dt G1(U) = -D_m F1(V),      d/dt G2(V) = -D_m F2(U),

which this module assembles as a mass-matrix ODE  M d(U,V)/dt = g(U, V).
Inverse operators appearing in the Hamiltonian forms of the
energy-conserving families are never formed; they are cleared onto the
time-derivative side, which also keeps everything well defined on even
periodic grids where the forward average is singular.

Families (one-parameter versions used in benchmarks):

* mc2(lambda): 4-point, order 2, momentum-conserving, implicit midpoint
* ec2(lambda): 4-point, order 2, energy-conserving, AVF
* mc4(lambda): 6-point, order 4, momentum-conserving, 2-stage Gauss
* ec4(lambda): 7-point, order 4, energy-conserving, order-4 energy-preserving
  collocation
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .forms import Density, Term, expand_wrap
from .integrators import MassODE
from .stencil import (GridSpec1D, StencilOperator, apply_periodic,
                      assemble_matrix, compose, identity_op, make_dm,
                      make_dmc, make_mum, make_shift)

__all__ = [
    "BoussinesqParams",
    "SemidiscreteSystem",
    "build_mc2",
    "build_ec2",
    "build_mc4",
    "build_ec4",
    "build_family",
    "density",
    "global_invariant",
    "default_densities",
]

_MC2_S_VALUES = (0.0, 1.0 / 3.0, 0.5)


@dataclass(frozen=True)
class BoussinesqParams:
    """Raw family coefficients; lam records the one-parameter value used."""

    family: str
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    xi: float = 0.0
    s: float = 0.0
    lam: float = 0.0

    @staticmethod
    def from_lambda(family: str, lam: float, dx: float) -> "BoussinesqParams":
        family = family.upper()
        if family == "MC2":
            return BoussinesqParams("MC2", gamma=lam * dx ** 2, lam=lam)
        if family == "EC2":
            return BoussinesqParams("EC2", beta=lam * dx ** 2, lam=lam)
        if family == "MC4":
            return BoussinesqParams("MC4", xi=lam * dx ** 4, lam=lam)
        if family == "EC4":
            return BoussinesqParams("EC4", alpha=lam * dx ** 4, lam=lam)
        raise ValueError(f"unknown family {family!r}")


class QuadPiece:
    """coeff * outer( (A u) * (B u) ) contribution with exact Jacobian."""

    def __init__(self, outer, A, B, coeff):
        self.outer = sp.csr_matrix(outer)
        self.A = sp.csr_matrix(A)
        self.B = sp.csr_matrix(B)
        self.coeff = coeff

    def value(self, u):
        return self.coeff * (self.outer @ ((self.A @ u) * (self.B @ u)))

    def jac(self, u):
        Au = self.A @ u
        Bu = self.B @ u
        return self.coeff * (self.outer @ (sp.diags(Bu) @ self.A
                                           + sp.diags(Au) @ self.B))


@dataclass
class SemidiscreteSystem:
    """Mass operators, rhs/jacobian and monitor densities for one family."""

    grid: GridSpec1D
    params: BoussinesqParams
    mass_u_op: StencilOperator
    mass_v_op: StencilOperator
    M: sp.spmatrix
    Luv: sp.spmatrix              # g_u = Luv @ v  (always linear)
    Lvu: sp.spmatrix              # linear part of g_v
    quads: list                   # QuadPiece list feeding g_v
    densities: dict[int, Density]
    integrator: str
    hamiltonian: Density | None = None
    hamiltonian_vars: tuple[str, str] | None = None
    poly_degree: int = 2
    # discrete-gradient structure g = P grad_h (energy-conserving families)
    skew_mat: sp.spmatrix | None = None
    grad_lin: sp.spmatrix | None = None   # linear part of the u-gradient
    grad_quads: list | None = None        # quadratic pieces of the u-gradient
    grad_v_mat: sp.spmatrix | None = None  # v-gradient (linear)

    @property
    def n(self) -> int:
        return self.grid.n_nodes

    def split(self, x):
        return x[:self.n], x[self.n:]

    def rhs(self, x, t=0.0):
        u, v = self.split(x)
        gu = self.Luv @ v
        gv = self.Lvu @ u
        for q in self.quads:
            gv = gv + q.value(u)
        return np.concatenate([gu, gv])

    def jac_g(self, x, t=0.0):
        u, _ = self.split(x)
        Jvu = self.Lvu
        for q in self.quads:
            Jvu = Jvu + q.jac(u)
        z = sp.csr_matrix((self.n, self.n))
        return sp.bmat([[z, self.Luv], [Jvu, z]], format="csr")

    def grad_h_stacked(self, x):
        u, v = self.split(x)
        gu = self.grad_lin @ u
        for q in self.grad_quads:
            gu = gu + q.value(u)
        return np.concatenate([gu, self.grad_v_mat @ v])

    def hess_h_stacked(self, x):
        u, _ = self.split(x)
        Huu = self.grad_lin
        for q in self.grad_quads:
            Huu = Huu + q.jac(u)
        z = sp.csr_matrix((self.n, self.n))
        return sp.bmat([[Huu, z], [z, self.grad_v_mat]], format="csr")

    def mass_ode(self) -> MassODE:
        ode = MassODE(dim=2 * self.n, mass=self.M, g=self.rhs,
                      jac_g=self.jac_g, poly_degree=self.poly_degree)
        if self.skew_mat is not None:
            ode.skew_mat = self.skew_mat
            ode.grad_h = self.grad_h_stacked
            ode.hess_h = self.hess_h_stacked
        return ode

    def hamiltonian_fields(self, u, v) -> dict[str, np.ndarray]:
        """Fields the discrete Hamiltonian is written in."""
        if self.hamiltonian_vars == ("w", "z"):
            mum = make_mum()
            return {"w": apply_periodic(mum, u), "z": apply_periodic(mum, v)}
        return {"u": u, "v": v}

    def hamiltonian_gradient(self, u, v) -> dict[str, np.ndarray]:
        if self.hamiltonian is None:
            raise ValueError(f"{self.params.family} has no Hamiltonian density")
        return self.hamiltonian.gradient(self.hamiltonian_fields(u, v))


def _require_periodic(grid: GridSpec1D, family: str, min_cells: int):
    if grid.boundary != "periodic":
        raise ValueError(f"{family} requires a periodic grid")
    if grid.n_cells < min_cells:
        raise ValueError(
            f"{family} stencil needs at least {min_cells} cells, "
            f"got {grid.n_cells}")


def default_densities(grid: GridSpec1D) -> dict[int, Density]:
    """Monitor densities used when a scheme does not define its own:
    G1 = U, G2 = V, G3 = U V, G4 = (U^2 + V^2 + mu((D U_-1)^2))/2 + U^3/3.
    """
    I = identity_op()
    mum = make_mum()
    dsm1 = compose(make_dm(grid.dx), make_shift(-1))
    return {
        1: Density([Term(1.0, (("u", I),))]),
        2: Density([Term(1.0, (("v", I),))]),
        3: Density([Term(1.0, (("u", I), ("v", I)))]),
        4: Density([
            Term(0.5, (("u", I), ("u", I))),
            Term(0.5, (("v", I), ("v", I))),
            Term(0.5, (("u", dsm1), ("u", dsm1)), mum),
            Term(1.0 / 3.0, (("u", I), ("u", I), ("u", I))),
        ]),
    }


def _common_ops(grid: GridSpec1D):
    dx = grid.dx
    I = identity_op()
    S = make_shift(1)
    Sm1 = make_shift(-1)
    D = make_dm(dx)
    mum = make_mum()
    d2s = compose(compose(D, D), Sm1)          # centered second difference
    return dx, I, S, Sm1, D, mum, d2s


def build_mc2(params: BoussinesqParams, grid: GridSpec1D) -> SemidiscreteSystem:
    """4-point momentum-conserving family (order 2)."""
    _require_periodic(grid, "MC2", 4)
    if min(abs(params.s - sv) for sv in _MC2_S_VALUES) > 1e-12:
        raise ValueError("MC2 supports s in {0, 1/3, 1/2}")
    dx, I, S, Sm1, D, mum, d2s = _common_ops(grid)
    s, al, be, ga, xi = params.s, params.alpha, params.beta, params.gamma, params.xi

    c1 = (1.0 - s) * dx ** 2 / (3.0 - 5.0 * s)
    c2 = s * dx ** 2 / (5.0 * s - 1.0) if s != 0.0 else 0.0
    c3 = s * dx ** 2 / (s + 1.0) + xi * (3.0 * s - 1.0) * (1.0 - 2.0 * s)

    g1op = compose(mum, I + s * dx ** 2 * d2s)
    g2op = compose(mum, I + ga * d2s)
    A1 = I + c1 * d2s
    A2 = I + c2 * d2s

    n = grid.n_nodes
    Dm = assemble_matrix(D, n)
    Luv = assemble_matrix(compose(D, I + al * d2s), n)
    Lvu = assemble_matrix(compose(D, I - (1.0 + be) * d2s), n)
    quads = [
        QuadPiece(Dm, assemble_matrix(A1, n), assemble_matrix(A2, n), 1.0),
    ]
    if c3 != 0.0:
        Imat = sp.identity(n, format="csr")
        quads.append(QuadPiece(assemble_matrix(compose(D, d2s), n), Imat, Imat, -c3))
        quads.append(QuadPiece(Dm, assemble_matrix(compose(D, Sm1), n),
                               assemble_matrix(D, n), c3))

    densities = {
        1: Density([Term(1.0, (("u", g1op),))]),
        2: Density([Term(1.0, (("v", g2op),))]),
        3: Density([Term(1.0, (("u", g1op), ("v", g2op)))]),
    }
    M = sp.block_diag([assemble_matrix(g1op, n), assemble_matrix(g2op, n)],
                      format="csr")
    return SemidiscreteSystem(grid, params, g1op, g2op, M, Luv, Lvu, quads,
                              densities, integrator="midpoint")


def build_ec2(params: BoussinesqParams, grid: GridSpec1D) -> SemidiscreteSystem:
    """4-point energy-conserving family (order 2)."""
    _require_periodic(grid, "EC2", 4)
    dx, I, S, Sm1, D, mum, d2s = _common_ops(grid)
    al, be, ga = params.alpha, params.beta, params.gamma

    g1op = mum
    g2op = compose(mum, I + ga * d2s)
    Pm = compose(compose(mum, mum), Sm1)       # mu^2 S^-1
    P = compose(mum, Sm1)
    A = I + al * d2s
    B = I + ga * d2s
    dsm1 = compose(D, Sm1)

    n = grid.n_nodes
    Luv = assemble_matrix(compose(D, A), n)
    Lvu = assemble_matrix(compose(D, I - (1.0 + be) * d2s), n)
    Pmat = assemble_matrix(Pm, n)
    quads = [QuadPiece(assemble_matrix(D, n), Pmat, Pmat, 1.0)]

    dc = make_dmc(dx)
    densities = {
        1: Density([Term(1.0, (("u", g1op),))]),
        2: Density([Term(1.0, (("v", g2op),))]),
        4: Density([
            Term(0.5, (("u", mum), ("u", mum))),
            Term(0.5 * (1.0 + be), (("u", dc), ("u", dc)), mum),
            Term(0.5, (("v", compose(mum, A)), ("v", compose(mum, B)))),
            Term(1.0 / 6.0, (("u", mum), ("u", Pm), ("u", Pm))),
            Term(1.0 / 6.0, (("u", mum), ("u", compose(mum, mum)),
                             ("u", compose(mum, mum)))),
        ]),
    }
    # same density written in the averaged variables w = mu u, z = mu v
    hamiltonian = Density([
        Term(0.5, (("w", I), ("w", I))),
        Term(0.5 * (1.0 + be), (("w", dsm1), ("w", dsm1)), mum),
        Term(0.5, (("z", A), ("z", B))),
        Term(1.0 / 6.0, (("w", I), ("w", P), ("w", P))),
        Term(1.0 / 6.0, (("w", I), ("w", mum), ("w", mum))),
    ])
    M = sp.block_diag([assemble_matrix(g1op, n), assemble_matrix(g2op, n)],
                      format="csr")
    return SemidiscreteSystem(grid, params, g1op, g2op, M, Luv, Lvu, quads,
                              densities, integrator="avf2",
                              hamiltonian=hamiltonian,
                              hamiltonian_vars=("w", "z"))


def build_mc4(params: BoussinesqParams, grid: GridSpec1D) -> SemidiscreteSystem:
    """6-point momentum-conserving family (order 4)."""
    _require_periodic(grid, "MC4", 6)
    dx, I, S, Sm1, D, mum, d2s = _common_ops(grid)
    al, be, ga, xi = params.alpha, params.beta, params.gamma, params.xi
    Sm2 = make_shift(-2)
    D2 = compose(D, D)
    d4s2 = compose(compose(D2, D2), Sm2)       # D^4 S^-2

    def phi(p):
        return Sm1 + p * dx ** 2 * compose(D2, Sm2)

    g1op = compose(mum, I - dx ** 2 / 8.0 * d2s)
    g2op = compose(mum, I - dx ** 2 / 8.0 * d2s + xi * d4s2)

    n = grid.n_nodes
    Dm = assemble_matrix(D, n)
    Luv = assemble_matrix(
        compose(D, I - dx ** 2 / 24.0 * d2s + al * d4s2), n)

    # F2 = lin_F2(U) + quadratic pieces; g_v = -D @ F2
    lin_F2 = (d2s - I + dx ** 2 / 24.0 * compose(d2s, I - 3.0 * d2s)
              + be * d4s2)
    Lvu = assemble_matrix(compose(D, lin_F2), n).multiply(-1.0).tocsr()

    f2_quads = [
        (identity_op(), I, I, -1.0),
        (d2s, I, I, dx ** 2 / 24.0),
    ]

    def theta_pieces(coeff, p1, p2, p3, p4, p5, p6):
        out = [(identity_op(), compose(D2, phi(p1)), compose(D2, phi(p2)), coeff)]
        if p3 != 0.0:
            out.append((identity_op(), compose(S, phi(p4)), d4s2, coeff * p3))
        if p5 != 0.0:
            out.append((identity_op(), compose(compose(D, mum), phi(p6)),
                        compose(compose(compose(D2, D), mum), Sm2), coeff * p5))
        return out

    if ga != 0.0:
        f2_quads += theta_pieces(-ga / 2.0, -0.25, -0.375, -2.0, -3.0 / 16.0,
                                 -2.0, -1.0 / 16.0)
    f2_quads += theta_pieces(7.0 * dx ** 4 / 192.0, 0.0, 0.0, 8.0 / 7.0,
                             -0.375, 0.0, 0.0)

    quads = [QuadPiece(assemble_matrix(compose(D, outer), n),
                       assemble_matrix(A, n), assemble_matrix(B, n), -c)
             for outer, A, B, c in f2_quads]

    densities = {
        1: Density([Term(1.0, (("u", g1op),))]),
        2: Density([Term(1.0, (("v", g2op),))]),
        3: Density([Term(1.0, (("u", g1op), ("v", g2op)))]),
    }
    M = sp.block_diag([assemble_matrix(g1op, n), assemble_matrix(g2op, n)],
                      format="csr")
    return SemidiscreteSystem(grid, params, g1op, g2op, M, Luv, Lvu, quads,
                              densities, integrator="gauss4")


def build_ec4(params: BoussinesqParams, grid: GridSpec1D) -> SemidiscreteSystem:
    """7-point energy-conserving family (order 4).

    Assembled in the Hamiltonian form cleared of inverses: mass operator
    N = S nu+ + gamma D^4 S^-1 nu+ on both components, rhs = D mu applied to
    the gradient components of the discrete Hamiltonian (the u-gradient is
    the closed form -nu+ S F2hat).
    """
    _require_periodic(grid, "EC4", 7)
    dx, I, S, Sm1, D, mum, d2s = _common_ops(grid)
    al, be, ga = params.alpha, params.beta, params.gamma
    Sm2, Sm3 = make_shift(-2), make_shift(-3)
    D2 = compose(D, D)
    D4 = compose(D2, D2)
    d4s2 = compose(D4, Sm2)
    nup = I + dx ** 2 / 6.0 * d2s
    num = I - dx ** 2 / 6.0 * d2s

    mass_op = compose(S + ga * compose(D4, Sm1), nup)
    n = grid.n_nodes
    Mmat = assemble_matrix(mass_op, n)
    M = sp.block_diag([Mmat, Mmat], format="csr")

    Dmu_mat = assemble_matrix(compose(D, mum), n)
    C = I + ga * d4s2
    # grad_v = C nu+ (nu- + alpha D^4 S^-2) v (linear, self-adjoint ops)
    grad_v_mat = assemble_matrix(
        compose(C, compose(nup, num + al * d4s2)), n)
    Luv = (Dmu_mat @ grad_v_mat).tocsr()

    # grad_u = -(nu+ S) F2hat(u);  g_v = D mu grad_u
    nupS_op = compose(nup, S)
    lin_F2h = (compose(D2, Sm2) - compose(num, Sm1)
               + (be - dx ** 2 / 4.0) * compose(D4, Sm3))
    grad_lin = assemble_matrix(compose(nupS_op, lin_F2h), n).multiply(-1.0).tocsr()
    nups1 = compose(nup, Sm1)
    f2h_quads = [
        (identity_op(), nups1, nups1, -1.0),
        (identity_op(), nups1, compose(compose(D2, nup), Sm2), dx ** 2 / 3.0),
        (D2, compose(nup, Sm2), compose(nup, Sm2), dx ** 2 / 6.0),
    ]
    grad_quads = [QuadPiece(assemble_matrix(compose(nupS_op, outer), n),
                            assemble_matrix(A, n), assemble_matrix(B, n), -c)
                  for outer, A, B, c in f2h_quads]
    Lvu = (Dmu_mat @ grad_lin).tocsr()
    quads = [QuadPiece(Dmu_mat @ q.outer, q.A, q.B, q.coeff)
             for q in grad_quads]
    P = sp.bmat([[sp.csr_matrix((n, n)), Dmu_mat],
                 [Dmu_mat, sp.csr_matrix((n, n))]], format="csr")

    # discrete Hamiltonian G4 (drives the energy monitor and the gradient)
    g4_terms = [
        Term(0.5, (("v", C), ("v", compose(nup, num + al * d4s2)))),
        Term(0.5, (("u", compose(D, Sm1)),
                   ("u", compose(compose(D, nup),
                                 Sm1 - dx ** 2 / 4.0 * compose(D2, Sm2)))), mum),
        Term(0.5, (("u", I), ("u", compose(nup, num - be * d4s2)))),
    ]
    g4_terms += expand_wrap(nup, 1.0 / 3.0, (("u", nup), ("u", nup)),
                            extra=(("u", I),))
    g4_terms += expand_wrap(nup, -dx ** 2 / 9.0,
                            (("u", nup), ("u", compose(compose(D2, nup), Sm1))),
                            extra=(("u", I),))
    g4_terms += expand_wrap(compose(nup, D2), -dx ** 2 / 18.0,
                            (("u", nups1), ("u", nups1)), extra=(("u", I),))
    g4 = Density(g4_terms)

    densities = {
        1: Density([Term(1.0, (("u", identity_op()),))]),
        2: Density([Term(1.0, (("v", C),))]),
        4: g4,
    }
    return SemidiscreteSystem(grid, params, mass_op, mass_op, M, Luv, Lvu,
                              quads, densities, integrator="avf4",
                              hamiltonian=g4, hamiltonian_vars=("u", "v"),
                              skew_mat=P, grad_lin=grad_lin,
                              grad_quads=grad_quads, grad_v_mat=grad_v_mat)


_BUILDERS = {"MC2": build_mc2, "EC2": build_ec2, "MC4": build_mc4,
             "EC4": build_ec4}


def build_family(family: str, lam: float, grid: GridSpec1D) -> SemidiscreteSystem:
    params = BoussinesqParams.from_lambda(family, lam, grid.dx)
    return _BUILDERS[params.family](params, grid)


def density(system: SemidiscreteSystem, which: int, state) -> np.ndarray:
    """Density field G_which at every node; raises for undefined indices."""
    if which not in system.densities:
        raise ValueError(
            f"density G{which} is not defined for family {system.params.family}")
    u, v = state
    return system.densities[which].field({"u": u, "v": v})


def global_invariant(system: SemidiscreteSystem, which: int, state) -> float:
    return system.grid.dx * float(np.sum(density(system, which, state)))
