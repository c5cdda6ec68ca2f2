"""Error metrics, invariant-drift diagnostics and CSV report emission."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "RunReport",
    "err_alpha",
    "rel_solution_error",
    "order_estimate",
    "write_report",
    "write_series",
    "write_profile",
    "format_float",
]


@dataclass
class RunReport:
    scheme: str
    dx: float
    dt: float
    T: float
    lam: float
    err1: float
    err2: float
    err3: float
    err4: float
    sol_err: float
    newton_avg_iters: float
    wall_seconds: float

    @property
    def errs(self) -> tuple[float, float, float, float]:
        return (self.err1, self.err2, self.err3, self.err4)


def err_alpha(density_series, dx: float) -> float:
    """dx * max_{j>=1} |sum_i G(t_j) - sum_i G(t_0)| over a series of grid sums."""
    s = np.asarray(density_series, dtype=float)
    if s.size < 2:
        return 0.0
    return dx * float(np.max(np.abs(s[1:] - s[0])))


def rel_solution_error(u_numeric, u_exact_sampled) -> float:
    """Euclidean-norm relative error at the final time (u component)."""
    denom = np.linalg.norm(u_exact_sampled)
    if denom == 0.0:
        raise ValueError("exact solution has zero norm")
    return float(np.linalg.norm(np.asarray(u_numeric) - u_exact_sampled) / denom)


def order_estimate(errors) -> list[float]:
    """Observed orders pi_k = log(err_k/err_{k-1}) / log(dx_k/dx_{k-1}).

    `errors` is a list of (dx, err) pairs with strictly increasing dx.
    """
    pts = sorted(errors)
    if any(e <= 0.0 for _, e in pts):
        raise ValueError("errors must be positive")
    if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
        raise ValueError("dx values must be strictly increasing")
    out = []
    for (dx0, e0), (dx1, e1) in zip(pts, pts[1:]):
        out.append(math.log(e1 / e0) / math.log(dx1 / dx0))
    return out


def format_float(x: float) -> str:
    """Decimal text that round-trips doubles (17 significant digits)."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


REPORT_HEADER = ("scheme,dx,dt,T,lambda,err1,err2,err3,err4,sol_err,"
                 "newton_avg_iters,wall_seconds")


def write_report(reports, path) -> None:
    """report.csv per the documented schema; accepts one report or a list."""
    if isinstance(reports, RunReport):
        reports = [reports]
    lines = [REPORT_HEADER]
    for r in reports:
        vals = [r.dx, r.dt, r.T, r.lam, r.err1, r.err2, r.err3, r.err4,
                r.sol_err, r.newton_avg_iters, r.wall_seconds]
        lines.append(",".join([r.scheme] + [format_float(v) for v in vals]))
    _write_lines(path, lines)


def write_series(series, path, dt: float | None = None, times=None) -> None:
    """series.csv: j,t,sumG1,sumG2,sumG3,sumG4."""
    rows = np.atleast_2d(np.asarray(series, dtype=float))
    lines = ["j,t,sumG1,sumG2,sumG3,sumG4"]
    if rows.size:
        for j, row in enumerate(rows):
            t = times[j] if times is not None else (dt or 0.0) * j
            lines.append(",".join([str(j), format_float(t)]
                                  + [format_float(v) for v in row]))
    _write_lines(path, lines)


def write_profile(x, u, v, path) -> None:
    """profile.csv: i,x,u,v (final-time profile)."""
    lines = ["i,x,u,v"]
    for i in range(len(x)):
        lines.append(",".join([str(i), format_float(x[i]),
                               format_float(u[i]), format_float(v[i])]))
    _write_lines(path, lines)


def _write_lines(path, lines) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
