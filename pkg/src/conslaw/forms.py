"""Polynomial densities built from stencil-operator images.

A Density is a sum of terms  coeff * outer( prod_k (op_k x_k) )  where each
factor applies a StencilOperator to one of the named variables and the
pointwise product is optionally wrapped in one more operator (`outer`, e.g.
a forward average).  This covers every conserved density and discrete
Hamiltonian used here, and makes two things mechanical on periodic grids:

* the per-node density field (exact attribution, outer included),
* the exact gradient of the grid sum, using operator adjoints
  (the grid sum of outer(f) is coeff_sum(outer) * sum(f)).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .stencil import StencilOperator, apply_periodic, identity_op

__all__ = ["Term", "Density"]


@dataclass(frozen=True)
class Term:
    coeff: float
    factors: tuple[tuple[str, StencilOperator], ...]
    outer: StencilOperator = field(default_factory=identity_op)


class Density:
    """Sum of Terms over named periodic fields (all of one common length)."""

    def __init__(self, terms: list[Term]):
        self.terms = list(terms)
        self.variables = sorted({v for t in self.terms for v, _ in t.factors})

    def field(self, fields: dict[str, np.ndarray]) -> np.ndarray:
        n = len(next(iter(fields.values())))
        out = np.zeros(n)
        for t in self.terms:
            prod = np.ones(n)
            for var, op in t.factors:
                prod *= apply_periodic(op, fields[var])
            out += t.coeff * apply_periodic(t.outer, prod)
        return out

    def grid_sum(self, fields: dict[str, np.ndarray]) -> float:
        return float(np.sum(self.field(fields)))

    def gradient(self, fields: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        """Gradient of grid_sum w.r.t. every variable's node values."""
        n = len(next(iter(fields.values())))
        grads = {v: np.zeros(n) for v in self.variables}
        for t in self.terms:
            sigma = t.outer.coeff_sum()
            if sigma == 0.0:
                continue
            imgs = [apply_periodic(op, fields[var]) for var, op in t.factors]
            for k, (var, op) in enumerate(t.factors):
                rest = np.ones(n)
                for j, img in enumerate(imgs):
                    if j != k:
                        rest *= img
                grads[var] += t.coeff * sigma * apply_periodic(op.adjoint(), rest)
        return grads

    def gradient_fd(self, fields: dict[str, np.ndarray], eps: float = 1e-5
                    ) -> dict[str, np.ndarray]:
        """Central finite differences of grid_sum; oracle for gradient()."""
        grads = {}
        for var in self.variables:
            base = fields[var]
            g = np.zeros_like(base)
            for i in range(len(base)):
                fp = {k: v.copy() for k, v in fields.items()}
                fp[var][i] += eps
                fm = {k: v.copy() for k, v in fields.items()}
                fm[var][i] -= eps
                g[i] = (self.grid_sum(fp) - self.grid_sum(fm)) / (2 * eps)
            grads[var] = g
        return grads


def expand_wrap(op: StencilOperator, coeff: float,
                factors: tuple[tuple[str, StencilOperator], ...],
                extra: tuple[tuple[str, StencilOperator], ...] = ()) -> list[Term]:
    """Distribute `op` over a product: op(prod) * extra-product as pure Terms.

    Uses op(fg)_m = sum_k tap_k (S^k f)(S^k g)_m, exact nodewise, so the
    resulting terms carry no outer wrapper around the op-image.
    """
    from .stencil import compose, make_shift

    out = []
    for k, c in op.taps:
        shifted = tuple((var, compose(make_shift(k), o)) for var, o in factors)
        out.append(Term(coeff * c, extra + shifted))
    return out
