"""Closed-form benchmark solutions.

Boussinesq system u_t = v_x, v_t = (u + u^2 - u_xx)_x: single soliton and
two-soliton interaction.  pKP equation: tanh travelling wave.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SolitonParams",
    "TwoSolitonParams",
    "soliton_uv",
    "soliton_uv_t",
    "two_soliton_uv",
    "pkp_wave",
]


@dataclass(frozen=True)
class SolitonParams:
    p: float = 1.0 / np.sqrt(3.0)
    d: float = 10.0

    def __post_init__(self):
        if abs(self.p) >= 1.0:
            raise ValueError("need |p| < 1 for a real wave speed")

    @property
    def c(self) -> float:
        return np.sqrt(1.0 - self.p ** 2)


def soliton_uv(x, t, params: SolitonParams = SolitonParams()):
    """Single soliton: u = -(3p²/2) sech²(p/2 (x - ct + d)), v = -c u."""
    p, c, d = params.p, params.c, params.d
    arg = 0.5 * p * (np.asarray(x, dtype=float) - c * t + d)
    s2 = 1.0 / np.cosh(np.clip(arg, -350.0, 350.0)) ** 2
    u = -1.5 * p ** 2 * s2
    return u, -c * u


def soliton_uv_t(x, t, params: SolitonParams = SolitonParams()):
    """Exact time derivatives (u_t, v_t) of the single soliton."""
    p, c, d = params.p, params.c, params.d
    arg = 0.5 * p * (np.asarray(x, dtype=float) - c * t + d)
    arg = np.clip(arg, -350.0, 350.0)
    sech2 = 1.0 / np.cosh(arg) ** 2
    # d/dt sech²(arg) = -2 sech² tanh * arg_t,  arg_t = -cp/2
    ds2_dt = c * p * sech2 * np.tanh(arg)
    return -1.5 * p ** 2 * ds2_dt, 1.5 * c * p ** 2 * ds2_dt


@dataclass(frozen=True)
class TwoSolitonParams:
    p1: float = 1.0 / np.sqrt(6.0)
    p2: float = 1.0 / np.sqrt(5.0)
    d1: float = -20.0
    d2: float = 20.0

    @property
    def c1(self) -> float:
        return -np.sqrt(1.0 - self.p1 ** 2)

    @property
    def c2(self) -> float:
        return np.sqrt(1.0 - self.p2 ** 2)

    @property
    def interaction(self) -> float:
        dc2 = (self.c1 - self.c2) ** 2
        den = dc2 - 3.0 * (self.p1 + self.p2) ** 2
        if den == 0.0:
            raise ValueError("degenerate soliton pair")
        return (dc2 - 3.0 * (self.p1 - self.p2) ** 2) / den


def two_soliton_uv(x, t, params: TwoSolitonParams = TwoSolitonParams()):
    """u = -6 (log w)_xx, v = -6 (log w)_xt with
    w = 1 + e^{n1} + e^{n2} + A e^{n1+n2}.

    v follows from u_t = v_x with v -> 0 at infinity.  Exponentials are
    evaluated in shifted form exp(eta - s) so large |x| cannot overflow.
    """
    pr = params
    x = np.asarray(x, dtype=float)
    A = pr.interaction
    e1 = pr.p1 * (x - pr.c1 * t + pr.d1)
    e2 = pr.p2 * (x - pr.c2 * t + pr.d2)
    s = np.maximum.reduce([np.zeros_like(x), e1, e2, e1 + e2 + np.log(A)])
    E0 = np.exp(-s)
    E1 = np.exp(e1 - s)
    E2 = np.exp(e2 - s)
    E12 = A * np.exp(e1 + e2 - s)
    p1, p2, c1, c2 = pr.p1, pr.p2, pr.c1, pr.c2
    w = E0 + E1 + E2 + E12
    wx = p1 * E1 + p2 * E2 + (p1 + p2) * E12
    wxx = p1 ** 2 * E1 + p2 ** 2 * E2 + (p1 + p2) ** 2 * E12
    wt = -c1 * p1 * E1 - c2 * p2 * E2 - (c1 * p1 + c2 * p2) * E12
    wxt = -c1 * p1 ** 2 * E1 - c2 * p2 ** 2 * E2 \
        - (p1 + p2) * (c1 * p1 + c2 * p2) * E12
    u = -6.0 * (w * wxx - wx ** 2) / w ** 2
    v = -6.0 * (w * wxt - wx * wt) / w ** 2
    return u, v


def pkp_wave(x, y, t):
    """Travelling wave 2 tanh(x + y - 7t/4 + 5) + 2 of the pKP equation."""
    return 2.0 * np.tanh(np.asarray(x, dtype=float) + np.asarray(y) - 1.75 * t + 5.0) + 2.0
