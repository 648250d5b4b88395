"""Norm histories, weighted energies, moment functionals and decay fits.

The recorder walks alongside a nonlinear run and reduces each snapshot
to one EnergyRow of scalars: Sobolev norms of (v, u), the weighted
energies J and J_psi built from the Gaussian space-time weight, the
conserved mass excess M, the momentum moment F, the vorticity norm and
the norms of the wave-form source.  On top of the histories sit the
fitting utilities (power-law and stretched-exponential least squares on
a log ordinate) and the closed-form oracles: the convolution inequality
check and the finite-propagation lower-bound margins.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, fields as dc_fields

import numpy as np
from scipy.integrate import quad

from . import euler
from .grids import Grid, SpectralOps
from .params import DampingLaw, GasLaw, WeightSpec, damping_coeff, weight_eval

__all__ = [
    "EnergyRow",
    "EnergyRecorder",
    "FitResult",
    "FitQualityWarning",
    "DomainSizeError",
    "weighted_l2_sq",
    "weighted_energy",
    "mass_excess",
    "momentum_moment",
    "ball_volume",
    "decay_fit",
    "convolution_oracle",
    "ConvolutionCheck",
    "cauchy_schwarz_margin",
    "moment_inequality_margins",
    "lower_bound_margin",
]


class DomainSizeError(RuntimeError):
    """The weight exponent overflowed on the active support of a field."""


class FitQualityWarning(UserWarning):
    """A decay fit has a large residual; the window may be pre-asymptotic."""


# =====================================================================
#  Weighted energies
# =====================================================================

def weighted_l2_sq(f: np.ndarray, two_psi: np.ndarray, cell: float,
                   extra: np.ndarray | None = None) -> float:
    """integral of e^(2 psi) f^2 (optionally times a further weight).

    Evaluated in log space so that huge weight values on the silent part
    of the grid cannot overflow: the guard rejects only combinations
    where the *integrand* itself would overflow.
    """
    with np.errstate(divide="ignore"):
        logf2 = 2.0 * np.log(np.abs(f))
    logterm = two_psi + logf2
    if np.any(logterm > 700.0):
        raise DomainSizeError(
            "weight exponent overflows on the active support; "
            "enlarge the box or shorten the run")
    vals = np.exp(logterm)
    if extra is not None:
        vals = vals * extra
    return float(np.sum(vals)) * cell


@dataclass(frozen=True)
class WeightedEnergy:
    """J = int e^(2psi) g^2 and J_psi = int e^(2psi) (-psi_t) g^2."""

    J: float
    J_psi: float


def weighted_energy(t: float, f: np.ndarray, spec: WeightSpec, grid: Grid,
                    mesh: np.ndarray | None = None,
                    support_R: float | None = None) -> WeightedEnergy:
    """J and J_psi of one field.

    With support_R set, integration is restricted to the propagation cone
    |x| <= support_R + t + 2: the continuum field vanishes outside it, and
    what the grid carries there is transform ringing that the cone-leak
    monitor bounds separately.  Without the restriction the weight on the
    silent far field would overflow any finite exponent budget.
    """
    mesh = grid.mesh() if mesh is None else mesh
    we = weight_eval(t, mesh, spec)
    two_psi = 2.0 * we.psi
    if support_R is not None:
        rad = np.sqrt(np.sum(mesh * mesh, axis=0))
        outside = rad > support_R + t + 2.0
        f = np.where(outside, 0.0, f)
    j = weighted_l2_sq(f, two_psi, grid.cell)
    j_psi = weighted_l2_sq(f, two_psi, grid.cell, extra=-we.psi_t)
    return WeightedEnergy(J=j, J_psi=j_psi)


# =====================================================================
#  Moment functionals
# =====================================================================

def ball_volume(n: int, r) -> np.ndarray | float:
    """Volume of the ball of radius r: 2r, pi r^2, 4/3 pi r^3."""
    r = np.asarray(r, dtype=float)
    out = {1: 2.0 * r, 2: np.pi * r ** 2, 3: 4.0 / 3.0 * np.pi * r ** 3}[n]
    return float(out) if out.ndim == 0 else out


def mass_excess(st: euler.EulerState, g: GasLaw, ops: SpectralOps) -> float:
    """M = integral of (rho - 1); conserved exactly by the flow."""
    ph = euler.from_symmetric(st, g)
    return ops.quad(ph.rho - 1.0)


def momentum_moment(st: euler.EulerState, g: GasLaw, ops: SpectralOps,
                    mesh: np.ndarray | None = None) -> float:
    """F = integral of x . (rho u)."""
    mesh = ops.grid.mesh() if mesh is None else mesh
    ph = euler.from_symmetric(st, g)
    integrand = sum(mesh[i] * ph.rho * ph.u[i] for i in range(ops.grid.n))
    return ops.quad(integrand)


# =====================================================================
#  Row recorder
# =====================================================================

@dataclass
class EnergyRow:
    """One snapshot reduced to scalars.  Column order is field order."""

    t: float
    v_l2: float
    v_linf: float
    u_l2: float
    u_linf: float
    rho_l2: float
    rho_linf: float
    cone_leak: float
    dv1_l2: float
    dv1_linf: float
    du1_l2: float
    du1_linf: float
    dv2_l2: float
    du2_l2: float
    vt_l2: float
    vt_linf: float
    J_v: float
    J_psi_v: float
    J_u: float
    J_psi_u: float
    Jgrad_v: float
    Jgrad_u: float
    Jvt: float
    mon_low: float
    mon_high: float
    wmon_low: float
    wmon_high: float
    mass: float
    moment: float
    vort_l2: float
    src_l1: float
    src_l2: float
    dsrc1_l2: float
    dsrc2_l2: float

    @classmethod
    def columns(cls):
        return [f.name for f in dc_fields(cls)]


class EnergyRecorder:
    """Callable snapshot hook that accumulates EnergyRows.

    with_source and with_weights can be switched off to cheapen large
    sweeps; the corresponding columns then hold zeros.
    """

    def __init__(self, grid: Grid, d: DampingLaw, g: GasLaw, spec: WeightSpec,
                 *, with_source: bool = True, with_weights: bool = True,
                 dealias: bool = True, support_R: float | None = None,
                 ops: SpectralOps | None = None):
        self.grid = grid
        self.d = d
        self.g = g
        self.spec = spec
        self.with_source = with_source
        self.with_weights = with_weights
        self.dealias = dealias
        self.support_R = support_R
        self.ops = ops or SpectralOps(grid)
        self.mesh = grid.mesh()
        self.radius = np.sqrt(np.sum(self.mesh * self.mesh, axis=0))
        self.rows: list[EnergyRow] = []

    def __call__(self, st: euler.EulerState):
        ops, n = self.ops, self.grid.n
        v, u = st.v, st.u
        dv, du = euler.rhs(st.t, v, u, self.d, self.g, ops, dealias=self.dealias)

        grad_v = ops.grad(v)
        dv1_l2 = sum(ops.l2(gv) for gv in grad_v)
        dv1_linf = max(ops.linf(gv) for gv in grad_v)
        du1_l2 = sum(ops.deriv_l2(u[i], 1) for i in range(n))
        du1_linf = max(ops.linf(ops.deriv(u[i], j))
                       for i in range(n) for j in range(n))
        dv2_l2 = ops.deriv_l2(v, 2)
        du2_l2 = sum(ops.deriv_l2(u[i], 2) for i in range(n))

        u_l2 = math.sqrt(sum(ops.l2(u[i]) ** 2 for i in range(n)))
        u_linf = max(ops.linf(u[i]) for i in range(n))

        cone_leak = 0.0
        clip = None
        if self.support_R is not None:
            outside = self.radius > self.support_R + st.t + 2.0
            tot = ops.l2(v) + sum(ops.l2(u[i]) for i in range(n))
            out_amt = ops.l2(np.where(outside, v, 0.0)) \
                + sum(ops.l2(np.where(outside, u[i], 0.0)) for i in range(n))
            cone_leak = out_amt / max(tot, 1e-300)

            def clip(f):
                return np.where(outside, 0.0, f)

        if self.with_weights:
            we = weight_eval(st.t, self.mesh, self.spec)
            two_psi = 2.0 * we.psi
            cell = self.grid.cell
            cl = clip if clip is not None else (lambda f: f)
            J_v = weighted_l2_sq(cl(v), two_psi, cell)
            J_psi_v = weighted_l2_sq(cl(v), two_psi, cell, extra=-we.psi_t)
            J_u = sum(weighted_l2_sq(cl(u[i]), two_psi, cell) for i in range(n))
            J_psi_u = sum(weighted_l2_sq(cl(u[i]), two_psi, cell, extra=-we.psi_t)
                          for i in range(n))
            Jgrad_v = sum(weighted_l2_sq(cl(gv), two_psi, cell) for gv in grad_v)
            Jgrad_u = sum(weighted_l2_sq(cl(ops.deriv(u[i], j)), two_psi, cell)
                          for i in range(n) for j in range(n))
            Jvt = weighted_l2_sq(cl(dv), two_psi, cell)
        else:
            J_v = J_psi_v = J_u = J_psi_u = Jgrad_v = Jgrad_u = Jvt = 0.0

        if self.with_source:
            src = euler.nonlinear_wave_source(st, self.d, self.g, ops,
                                              dealias=self.dealias)
            src_l1 = ops.quad(np.abs(src))
            src_l2 = ops.l2(src)
            dsrc1_l2 = ops.deriv_l2(src, 1)
            dsrc2_l2 = ops.deriv_l2(src, 2)
        else:
            src_l1 = src_l2 = dsrc1_l2 = dsrc2_l2 = 0.0

        vort_l2 = 0.0
        if n >= 2:
            w = euler.vorticity(st, ops)
            vort_l2 = ops.l2(w) if n == 2 else \
                math.sqrt(sum(ops.l2(w[i]) ** 2 for i in range(3)))

        ph = euler.from_symmetric(st, self.g)
        rho_dev = ph.rho - 1.0
        B = self.spec.B
        gp = (1.0 + st.t) ** B
        gq = (1.0 + st.t) ** (B + 1.0 + self.d.lam)
        v_l2 = ops.l2(v)
        vt_l2 = ops.l2(dv)
        row = EnergyRow(
            t=st.t, v_l2=v_l2, v_linf=ops.linf(v), u_l2=u_l2, u_linf=u_linf,
            rho_l2=ops.l2(rho_dev), rho_linf=ops.linf(rho_dev),
            cone_leak=cone_leak,
            dv1_l2=dv1_l2, dv1_linf=dv1_linf, du1_l2=du1_l2, du1_linf=du1_linf,
            dv2_l2=dv2_l2, du2_l2=du2_l2, vt_l2=vt_l2, vt_linf=ops.linf(dv),
            J_v=J_v, J_psi_v=J_psi_v, J_u=J_u, J_psi_u=J_psi_u,
            Jgrad_v=Jgrad_v, Jgrad_u=Jgrad_u, Jvt=Jvt,
            mon_low=gp * (v_l2 ** 2 + u_l2 ** 2),
            mon_high=gq * (vt_l2 ** 2 + dv1_l2 ** 2 + du1_l2 ** 2),
            wmon_low=gp * (J_v + J_u),
            wmon_high=gq * (Jvt + Jgrad_v + Jgrad_u),
            mass=mass_excess(st, self.g, ops),
            moment=momentum_moment(st, self.g, ops, self.mesh),
            vort_l2=vort_l2,
            src_l1=src_l1, src_l2=src_l2, dsrc1_l2=dsrc1_l2, dsrc2_l2=dsrc2_l2)
        self.rows.append(row)

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    @property
    def times(self) -> np.ndarray:
        return self.series("t")

    def to_csv(self, path):
        cols = EnergyRow.columns()
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(cols)
            for r in self.rows:
                wr.writerow([repr(getattr(r, c)) for c in cols])


# =====================================================================
#  Decay fits
# =====================================================================

@dataclass(frozen=True)
class FitResult:
    """Least-squares line through (abscissa, log value)."""

    slope: float
    intercept: float
    residual: float
    n_pts: int
    window: tuple
    kind: str


def decay_fit(times, values, t_lo: float, t_hi: float, *, kind: str = "power",
              stretch_exponent: float | None = None,
              min_pts: int = 8) -> FitResult:
    """Fit log(values) against log(1+t) or (1+t)^stretch_exponent.

    kind="power": slope is the polynomial decay exponent.
    kind="stretched": abscissa (1+t)^e, slope is the stretched-exponential
    rate (e.g. -mu/(1-lam) for pure-friction decay with e = 1-lam).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = (times >= t_lo) & (times <= t_hi)
    if int(np.sum(sel)) < min_pts:
        raise ValueError(
            f"need at least {min_pts} samples in [{t_lo}, {t_hi}], "
            f"found {int(np.sum(sel))}")
    tt, yy = times[sel], values[sel]
    if np.any(yy <= 0.0):
        raise ValueError("decay_fit needs strictly positive values")
    if kind == "power":
        x = np.log1p(tt)
    elif kind == "stretched":
        if stretch_exponent is None:
            raise ValueError("stretched fit needs stretch_exponent")
        x = (1.0 + tt) ** stretch_exponent
    else:
        raise ValueError(f"unknown fit kind {kind!r}")
    y = np.log(yy)
    coef = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - np.polyval(coef, x)) ** 2)))
    if resid > 0.1:
        warnings.warn(f"decay fit residual {resid:.3f} exceeds 0.1; "
                      "window may be pre-asymptotic", FitQualityWarning)
    return FitResult(slope=float(coef[0]), intercept=float(coef[1]),
                     residual=resid, n_pts=int(tt.size),
                     window=(float(t_lo), float(t_hi)), kind=kind)


# =====================================================================
#  Closed-form oracles
# =====================================================================

@dataclass(frozen=True)
class ConvolutionCheck:
    """Ratios of the weak-coupling time integral to its predicted bound."""

    a: float
    b: float
    times: np.ndarray
    ratios: np.ndarray

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios))


def convolution_oracle(a: float, b: float, times=None) -> ConvolutionCheck:
    """Check int_0^t (1+t-s)^-a (1+s)^-b ds <= C (1+t)^-b by quadrature.

    Hypotheses a > 1 and 0 < b <= a are enforced; outside them the bound
    genuinely fails and the request is rejected.
    """
    if not a > 1.0:
        raise ValueError(f"convolution bound needs a > 1, got a={a}")
    if not 0.0 < b <= a:
        raise ValueError(f"convolution bound needs 0 < b <= a, got b={b}")
    if times is None:
        times = np.array([1.0, 10.0, 1e2, 1e3, 1e4])
    times = np.asarray(times, dtype=float)
    ratios = np.empty(times.size)
    for j, t in enumerate(times):
        def f(s):
            return (1.0 + t - s) ** (-a) * (1.0 + s) ** (-b)
        mid = 0.5 * t
        val = quad(f, 0.0, mid, limit=200)[0] + quad(f, mid, t, limit=200)[0]
        ratios[j] = val * (1.0 + t) ** b
    return ConvolutionCheck(a=a, b=b, times=times, ratios=ratios)


def cauchy_schwarz_margin(times, rho_l2, q0: float, R: float, n: int) -> np.ndarray:
    """margin(t) = ||rho-1||_L2 * sqrt(vol(R+t)) / q0, predicted >= 1."""
    times = np.asarray(times, dtype=float)
    rho_l2 = np.asarray(rho_l2, dtype=float)
    if q0 <= 0.0:
        raise ValueError("cauchy_schwarz_margin needs q0 > 0")
    return rho_l2 * np.sqrt(ball_volume(n, R + times)) / q0


def moment_inequality_margins(times, F, q0: float, n: int,
                              d: DampingLaw) -> np.ndarray:
    """(F' + b F) / (n q0) at interior sample times, predicted >= 1.

    F' by centered differences on the (possibly non-uniform) snapshot
    times; returns one margin per interior sample.
    """
    times = np.asarray(times, dtype=float)
    F = np.asarray(F, dtype=float)
    if times.size < 3:
        raise ValueError("need at least 3 samples for the centered difference")
    tm, t0, tp = times[:-2], times[1:-1], times[2:]
    dF = (F[2:] - F[:-2]) / (tp - tm)
    b = damping_coeff(t0, d)
    return (dF + b * F[1:-1]) / (n * q0)


def lower_bound_margin(times, rho_l2, u_l2, q0: float, R: float, n: int,
                       t0: float) -> dict:
    """Scaled lower-bound margins for density excess and velocity.

    m_rho = ||rho-1|| (R+t)^(n/2) / q0,  m_u = ||u|| (R+t)^((n+2)/2) / q0,
    with infima taken over t >= t0.  Positive infima are the desk-scale
    expression of the polynomial lower bounds.
    """
    times = np.asarray(times, dtype=float)
    rho_l2 = np.asarray(rho_l2, dtype=float)
    u_l2 = np.asarray(u_l2, dtype=float)
    if q0 <= 0.0:
        raise ValueError("lower_bound_margin needs q0 > 0")
    m_rho = rho_l2 * (R + times) ** (0.5 * n) / q0
    m_u = u_l2 * (R + times) ** (0.5 * (n + 2)) / q0
    sel = times >= t0
    if not np.any(sel):
        raise ValueError(f"no samples at or beyond t0={t0}")
    return {
        "times": times, "m_rho": m_rho, "m_u": m_u,
        "inf_rho": float(np.min(m_rho[sel])),
        "inf_u": float(np.min(m_u[sel])),
    }
