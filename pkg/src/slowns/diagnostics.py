"""Norms, functionals, decay schedules, and inequality monitors.

Conventions
-----------
All norms are absolutely homogeneous of degree 1 except the Besov *proxy*,
which returns the squared quantity ``sup_t t^delta ||e^{t Delta_h} u0||^2``
(degree 2), as documented on the function.

``L^inf_v`` means the max over stored slices; ``L^inf`` of a field means the
max over collocation points.  Mixed-norm weights ``|xi_h|^s`` with ``s < 0``
require zero horizontal mean per slice.

Unspecified absolute constants are configuration parameters defaulting to 1;
inequality monitors report the smallest constant that makes the inequality
hold over the run rather than asserting any fixed value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate

from .grid import Grid, ScalarField, Space, VectorField
from .ns25d import SliceStackState, Trajectory, _slice_weighted_sq, energy_ledger
from .ns3d import State3D

__all__ = [
    "mixed_norm",
    "sobolev3d",
    "besov_minus_delta",
    "besov_minus1_inf",
    "N_functional",
    "N_functional_lifted",
    "A_delta",
    "aux_constants",
    "AuxConstants",
    "g_schedule",
    "wiegner_check",
    "WiegnerReport",
    "lowfreq_check",
    "LowFreqReport",
    "fit_decay",
    "FitResult",
    "NormReport",
    "norm_report",
]

E = math.e


# ---------------------------------------------------------------------------
# mixed and Sobolev norms


def _hybrid_components(v) -> tuple[Grid, list[np.ndarray]]:
    if isinstance(v, ScalarField):
        comps = [v]
    elif isinstance(v, VectorField):
        comps = list(v.components)
    else:
        raise TypeError("expected ScalarField or VectorField")
    g = comps[0].grid
    out = []
    for c in comps:
        if c.space is Space.REAL:
            out.append(g.fft_h(c.data.astype(np.complex128)))
        else:
            out.append(g.ifft_v(c.data))
    return g, out


def _slice_values_sq(g: Grid, comps, s_h: float) -> np.ndarray:
    """Per-slice ``L_h^2 sum_kh |xi_h|^{2 s} |ahat|^2`` summed over components."""
    kh2 = g.kh2
    if s_h == 0.0:
        w = 1.0
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(kh2 > 0, kh2**s_h, 0.0)
    return _slice_weighted_sq(g, w, *comps)


def _check_zero_mean(g: Grid, comps, who: str) -> None:
    scale = math.sqrt(sum(float(np.sum(np.abs(c) ** 2)) for c in comps))
    if scale == 0.0:
        return
    worst = max(float(np.abs(c[0, 0, :]).max()) for c in comps)
    if worst / scale > 1e-10:
        raise ValueError(f"{who} with negative order requires zero horizontal mean")


def mixed_norm(v, p_v, s_h: float = 0.0) -> float:
    """``L^p`` over slices of the per-slice homogeneous ``H^{s}`` norm.

    ``p_v`` is 2 or ``inf`` (``float('inf')`` or the string ``"inf"``); the
    vertical ``L^2`` uses the quadrature weight ``L_v/n_v``.
    """
    if not -1.0 <= s_h <= 1.0:
        raise ValueError("s_h must lie in [-1, 1]")
    g, comps = _hybrid_components(v)
    if s_h < 0:
        _check_zero_mean(g, comps, "mixed_norm")
    vals = _slice_values_sq(g, comps, s_h)
    if p_v in (2, 2.0):
        return float(np.sqrt(np.sum(vals) * (g.L_v / g.n_v)))
    if p_v in (np.inf, float("inf"), "inf"):
        return float(np.sqrt(vals.max()))
    raise ValueError("p_v must be 2 or inf")


def _lp_v_l2_h(v, p: float) -> float:
    """General vertical ``L^p`` of the slice ``L^2`` norm (monitor helper)."""
    g, comps = _hybrid_components(v)
    vals = np.sqrt(_slice_values_sq(g, comps, 0.0))
    if p == np.inf:
        return float(vals.max())
    return float((np.sum(vals**p) * (g.L_v / g.n_v)) ** (1.0 / p))


def sobolev3d(v, s: float) -> float:
    """Homogeneous 3-D Sobolev norm with the full wavenumber modulus."""
    if not -0.5 <= s <= 1.5:
        raise ValueError("s must lie in [-1/2, 3/2]")
    if isinstance(v, State3D):
        return v.sobolev(s)
    comps = v.components if isinstance(v, VectorField) else (v,)
    g = comps[0].grid
    spec = [c.to_spectral().data for c in comps]
    if s < 0:
        scale = math.sqrt(sum(float(np.sum(np.abs(c) ** 2)) for c in spec))
        if scale > 0:
            worst = max(float(abs(c[0, 0, 0])) for c in spec)
            if worst / scale > 1e-10:
                raise ValueError("negative-order norm requires zero total mean")
    k2f = g.k2_full
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(k2f > 0, k2f**s, 0.0)
    total = sum(float(np.sum(w * np.abs(c) ** 2)) for c in spec)
    return float(np.sqrt(total * g.volume))


# ---------------------------------------------------------------------------
# Besov proxies through the heat flow


def default_t_grid(lo: float = 1e-3, hi: float = 1e3, n: int = 200) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def besov_minus_delta(u0, delta: float, t_grid: np.ndarray | None = None) -> float:
    """Squared-norm proxy ``sup_t t^delta ||e^{t Delta_h} u0||^2_{Linf_v L2_h}``.

    Degree-2 homogeneous.  The sup runs over a finite log-spaced grid and is
    monotone nondecreasing under grid refinement.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    ts = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if ts.size == 0:
        raise ValueError("empty t grid")
    g, comps = _hybrid_components(u0)
    a2 = np.zeros((g.n_h * g.n_h, g.n_v))
    for c in comps:
        a2 += (c.real**2 + c.imag**2).reshape(-1, g.n_v)
    kh2 = g.kh2.reshape(-1)
    best = 0.0
    for block in np.array_split(ts, max(1, ts.size // 256)):
        decay = np.exp(-2.0 * np.outer(block, kh2))  # (nt, M)
        vals = g.L_h**2 * (decay @ a2)  # (nt, n_v)
        sup_z = vals.max(axis=1)
        best = max(best, float((block**delta * sup_z).max()))
    return best


def besov_minus1_inf(a, t_grid: np.ndarray | None = None) -> float:
    """``sup_t t^{1/2} || e^{t Delta} a ||_{L^inf}`` with the full heat flow."""
    ts = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if ts.size == 0:
        raise ValueError("empty t grid")
    comps = a.components if isinstance(a, VectorField) else (a,)
    g = comps[0].grid
    spec = [c.to_spectral().data for c in comps]
    k2f = g.k2_full
    best = 0.0
    for t in ts:
        decay = np.exp(-t * k2f)
        mag2 = sum(np.abs(g.ifftn(decay * c)) ** 2 for c in spec)
        best = max(best, float(math.sqrt(t) * np.sqrt(mag2.max())))
    return best


# ---------------------------------------------------------------------------
# stability functional


def N_functional(w: State3D) -> float:
    """``||w||^2_Linf + ||grad_h w||^2_{Linf_v L2_h} + ||d3 w||^2_{L2_v H^{1/2}_h}``."""
    g = w.grid
    u = w.real_components()
    linf2 = float(max(np.sqrt(u[0] ** 2 + u[1] ** 2 + u[2] ** 2).max(), 0.0)) ** 2
    hy = [g.ifft_v(c) for c in w.u_hat]  # hybrid: horizontal spectral, z real
    gradh2 = _slice_weighted_sq(g, g.kh2, *hy)
    d3 = [g.ifft_v(1j * g.k3_deriv * w.u_hat[i]) for i in range(3)]
    kh = np.sqrt(g.kh2)
    d3_half = _slice_weighted_sq(g, kh, *d3)
    term3 = float(np.sum(d3_half) * (g.L_v / g.n_v))
    return linf2 + float(gradh2.max()) + term3


def N_functional_lifted(u25, eps: float) -> float:
    """Slow-variable form: ``||u||^2_Linf + ||grad_h u||^2_{Linf_v L2_h}
    + eps ||dz u||^2_{L2_v H^{1/2}_h}`` on the slice-stack data."""
    if isinstance(u25, SliceStackState):
        g = u25.grid
        u1h, u2h = u25.velocity_hz()
        comps = [u1h, u2h]
        real = [g.ifft_h(c).real for c in comps]
    else:
        g, comps = _hybrid_components(u25)
        real = [g.ifft_h(c).real for c in comps]
    linf2 = float(np.sqrt(sum(r**2 for r in real)).max()) ** 2
    gradh2 = _slice_weighted_sq(g, g.kh2, *comps)
    if g.n_v > 1:
        d3 = [g.ifft_v(1j * g.k3_deriv * g.fft_v(c)) for c in comps]
        d3_half = _slice_weighted_sq(g, np.sqrt(g.kh2), *d3)
        term3 = eps * float(np.sum(d3_half) * (g.L_v / g.n_v))
    else:
        term3 = 0.0
    return linf2 + float(gradh2.max()) + term3


# ---------------------------------------------------------------------------
# initial-data functionals


def A_delta(u0, delta: float, C_delta: float = 1.0, t_grid=None) -> float:
    """Global-dissipation budget functional of the initial data.

    ``C_delta (||grad_h u0||^2 B^{1/delta} / ||u0||^{2/delta} + ||u0||^2)
    exp(C_delta ||u0||^2 (1 + ||u0||^2))`` with every norm the ``Linf_v L2_h``
    mixed norm and ``B`` the squared Besov proxy.
    """
    if C_delta <= 0:
        raise ValueError("C_delta must be positive")
    base = mixed_norm(u0, np.inf, 0.0)
    if base == 0.0:
        raise ValueError("A_delta undefined (division by zero)")
    grad = _gradh_mixed_inf(u0)
    b = besov_minus_delta(u0, delta, t_grid)
    term1 = grad**2 * b ** (1.0 / delta) / base ** (2.0 / delta)
    return (
        C_delta
        * (term1 + base**2)
        * math.exp(C_delta * base**2 * (1.0 + base**2))
    )


def _gradh_mixed_inf(u0) -> float:
    g, comps = _hybrid_components(u0)
    return float(np.sqrt(_slice_weighted_sq(g, g.kh2, *comps).max()))


@dataclass
class AuxConstants:
    C0: float
    C1: float
    U0: float
    T_delta: float


def aux_constants(
    u0, delta: float, eps: float, C: float = 1.0, C_delta: float = 1.0, t_grid=None
) -> AuxConstants:
    """Initial-data constants controlling decay and the background budget."""
    base = mixed_norm(u0, np.inf, 0.0)
    if base == 0.0:
        raise ValueError("aux constants undefined for zero data")
    c0 = max(base, mixed_norm(u0, np.inf, -delta)) * (1.0 + base)
    g, comps = _hybrid_components(u0)
    grad_l2 = float(
        np.sqrt(np.sum(_slice_weighted_sq(g, g.kh2, *comps)) * (g.L_v / g.n_v))
    )
    c1 = (1.0 + grad_l2) * math.exp(C * c0**2)
    if g.n_v > 1:
        dz = [g.ifft_v(1j * g.k3_deriv * g.fft_v(c)) for c in comps]
        u_mh = _l2v_hsh(g, comps, -0.5)
        u_ph = _l2v_hsh(g, comps, 0.5)
        dz_mh = _l2v_hsh(g, dz, -0.5)
        dz_ph = _l2v_hsh(g, dz, 0.5)
        u0_val = eps * dz_mh**2 + math.sqrt(u_mh * dz_mh) * math.sqrt(u_ph * dz_ph)
    else:
        u0_val = 0.0
    b = besov_minus_delta(u0, delta, t_grid)
    t_delta = C_delta ** (1.0 / delta) * (math.sqrt(b) / base) ** (2.0 / delta)
    return AuxConstants(C0=c0, C1=c1, U0=u0_val, T_delta=t_delta)


def _l2v_hsh(g: Grid, comps, s: float) -> float:
    if s < 0:
        _check_zero_mean(g, comps, "aux_constants")
    return float(np.sqrt(np.sum(_slice_values_sq(g, comps, s)) * (g.L_v / g.n_v)))


# ---------------------------------------------------------------------------
# truncation-radius schedules


def g_schedule(kind: str, T: float, delta: float, t):
    """Radius ``g(t)`` and Gronwall weight ``exp(2 int_0^t g^2)``.

    LogCube:   ``2 g^2 = (3/T) (e + t/T)^{-1} log^{-1}(e + t/T)``,
               weight ``log^3(e + t/T)``.
    PolyDelta: ``2 g^2 = (1/T)(1 + delta/2)(e + t/T)^{-1}``,
               weight ``e^{-(1+delta/2)} (e + t/T)^{1+delta/2}`` (the directly
               integrated constant).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("schedule times must be nonnegative")
    r = E + t_arr / T
    if kind == "LogCube":
        g2 = 0.5 * (3.0 / T) / (r * np.log(r))
        weight = np.log(r) ** 3
    elif kind == "PolyDelta":
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1) for PolyDelta")
        g2 = 0.5 * (1.0 + delta / 2.0) / (T * r)
        weight = math.exp(-(1.0 + delta / 2.0)) * r ** (1.0 + delta / 2.0)
    else:
        raise ValueError(f"unknown schedule kind {kind!r}")
    g = np.sqrt(g2)
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(g), float(weight)
    return g, weight


def schedule_quadrature_error(kind: str, T: float, delta: float, t_end: float) -> float:
    """Relative gap between ``2 int g^2`` by adaptive quadrature and the
    closed-form log-weight."""

    def integrand(s):
        g, _ = g_schedule(kind, T, delta, s)
        return 2.0 * g * g

    quad, _ = scipy.integrate.quad(integrand, 0.0, t_end, limit=200)
    _, w = g_schedule(kind, T, delta, t_end)
    closed = math.log(w)
    if closed == 0.0:
        return abs(quad)
    return abs(quad - closed) / abs(closed)


# ---------------------------------------------------------------------------
# inequality monitors


def _state_field_hybrid(state: SliceStackState, which: str):
    if which == "vorticity":
        return [state.omega_hz]
    if which == "velocity":
        return list(state.velocity_hz())
    raise ValueError("field must be 'velocity' or 'vorticity'")


def _lowpass_sq_linf(g: Grid, comps, radius: float) -> float:
    keep = g.kh2 <= radius * radius
    vals = np.zeros(g.n_v)
    for c in comps:
        vals += np.sum(np.where(keep, c.real**2 + c.imag**2, 0.0), axis=(0, 1))
    return float((g.L_h**2 * vals).max())


@dataclass
class WiegnerReport:
    """Frequency-split Gronwall monitor along one trajectory.

    ``rhs`` carries the configured constant; ``smallest_viable_C`` is the
    least constant for which the inequality holds at every sample.  The
    right-hand integrand includes the weight derivative ``2 g^2``, so a pure
    Gronwall identity corresponds to ``C = 1``.
    """

    kind: str
    T: float
    delta: float
    field: str
    C_config: float
    times: np.ndarray
    g: np.ndarray
    weight: np.ndarray
    normU2: np.ndarray
    normUlow2: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    omega_delta: np.ndarray | None
    hyp_residual: np.ndarray
    smallest_viable_C: float
    violations: list[float] = field(default_factory=list)
    schedule_quad_error: float = 0.0

    def to_rows(self) -> list[dict]:
        rows = []
        for i, t in enumerate(self.times):
            rows.append(
                {
                    "t": float(t),
                    "g": float(self.g[i]),
                    "weight": float(self.weight[i]),
                    "normU2": float(self.normU2[i]),
                    "normUlow2": float(self.normUlow2[i]),
                    "lhs": float(self.lhs[i]),
                    "rhs": float(self.rhs[i]),
                    "omega_delta": float(self.omega_delta[i])
                    if self.omega_delta is not None
                    else float("nan"),
                    "hyp_residual": float(self.hyp_residual[i]),
                }
            )
        return rows

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "T": self.T,
            "delta": self.delta,
            "field": self.field,
            "C_config": self.C_config,
            "smallest_viable_C": self.smallest_viable_C,
            "n_violations": len(self.violations),
            "max_hyp_residual": float(np.abs(self.hyp_residual).max()),
            "schedule_quad_error": self.schedule_quad_error,
        }


def wiegner_check(
    traj: Trajectory,
    field: str = "velocity",
    schedule: str = "LogCube",
    T: float = 1.0,
    delta: float = 0.5,
    C: float = 1.0,
) -> WiegnerReport:
    """Check the weighted decay inequality for the low/high frequency split.

    Per sample: lhs ``||U||^2_{Linf_v L2_h} exp(2 int g^2)`` against
    ``||U0||^2 + C int ||U_{flat,g}||^2 2 g^2 exp(2 int g^2)``, the integral
    trapezoid-accumulated over the sample grid.  Violations at the configured
    ``C`` are report entries, never exceptions.
    """
    if traj.states is None:
        raise ValueError("wiegner_check needs stored states")
    g25 = traj.states[0].grid
    ts = np.asarray(traj.times)
    gs, ws = g_schedule(schedule, T, delta, ts)
    norm2 = np.zeros(ts.size)
    low2 = np.zeros(ts.size)
    for i, st in enumerate(traj.states):
        comps = _state_field_hybrid(st, field)
        norm2[i] = float(_slice_weighted_sq(g25, 1.0, *comps).max())
        low2[i] = _lowpass_sq_linf(g25, comps, gs[i])
    integrand = low2 * 2.0 * gs**2 * ws
    K = scipy.integrate.cumulative_trapezoid(integrand, ts, initial=0.0)
    lhs = norm2 * ws
    rhs = norm2[0] + C * K
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(K > 0, (lhs - norm2[0]) / K, -np.inf)
    c_min = float(max(ratios.max(), 0.0))
    tol = 1e-12 * max(norm2[0], 1.0)
    violations = [float(t) for t, l, r in zip(ts, lhs, rhs) if l > r + tol]
    om_delta = None
    if field == "vorticity" and schedule == "PolyDelta":
        om_delta = np.maximum.accumulate((E + ts / T) ** (1.0 + delta / 2.0) * norm2)
    if traj.identities and traj.identities[0]:
        ledger = energy_ledger(traj)
        res = ledger.slice_residual_u if field == "velocity" else ledger.slice_residual_om
        hyp = np.abs(res).max(axis=1)
    else:
        hyp = np.full(ts.size, np.nan)
    return WiegnerReport(
        kind=schedule,
        T=T,
        delta=delta,
        field=field,
        C_config=C,
        times=ts,
        g=gs,
        weight=ws,
        normU2=norm2,
        normUlow2=low2,
        lhs=lhs,
        rhs=rhs,
        omega_delta=om_delta,
        hyp_residual=hyp,
        smallest_viable_C=c_min,
        violations=violations,
        schedule_quad_error=schedule_quadrature_error(schedule, T, delta, float(ts[-1])),
    )


@dataclass
class LowFreqReport:
    """Duhamel low-frequency control of velocity and vorticity."""

    times: np.ndarray
    u_lhs: np.ndarray
    u_heat: np.ndarray
    u_int: np.ndarray
    om_lhs: np.ndarray
    om_heat: np.ndarray
    om_int: np.ndarray
    smallest_viable_C_u: float
    smallest_viable_C_omega: float

    def summary(self) -> dict:
        return {
            "smallest_viable_C_u": self.smallest_viable_C_u,
            "smallest_viable_C_omega": self.smallest_viable_C_omega,
        }


def lowfreq_check(
    traj: Trajectory, schedule: str = "LogCube", T: float = 1.0, delta: float = 0.5
) -> LowFreqReport:
    """Check the low-pass Duhamel bounds

    ``||u_{flat,g}(t)|| <= ||e^{t Delta_h} u0|| + C g^2(t) int ||u||^2`` and
    ``||om_{flat,g}(t)|| <= g(t) ||e^{t Delta_h} u0|| + C g^2(t) int ||u|| ||om||``
    in the ``Linf_v L2_h`` norm, reporting the smallest viable constants.
    """
    if traj.states is None:
        raise ValueError("lowfreq_check needs stored states")
    g25 = traj.states[0].grid
    ts = np.asarray(traj.times)
    gs, _ = g_schedule(schedule, T, delta, ts)
    u0h = list(traj.states[0].velocity_hz())
    kh2 = g25.kh2
    n = ts.size
    u_low = np.zeros(n)
    om_low = np.zeros(n)
    u_norm = np.zeros(n)
    om_norm = np.zeros(n)
    heat = np.zeros(n)
    for i, st in enumerate(traj.states):
        uc = list(st.velocity_hz())
        oc = [st.omega_hz]
        u_low[i] = math.sqrt(_lowpass_sq_linf(g25, uc, gs[i]))
        om_low[i] = math.sqrt(_lowpass_sq_linf(g25, oc, gs[i]))
        u_norm[i] = float(np.sqrt(_slice_weighted_sq(g25, 1.0, *uc).max()))
        om_norm[i] = float(np.sqrt(_slice_weighted_sq(g25, 1.0, *oc).max()))
        decay = np.exp(-2.0 * ts[i] * kh2)
        heat[i] = float(np.sqrt(_slice_weighted_sq(g25, decay, *u0h).max()))
    int_u2 = scipy.integrate.cumulative_trapezoid(u_norm**2, ts, initial=0.0)
    int_uom = scipy.integrate.cumulative_trapezoid(u_norm * om_norm, ts, initial=0.0)
    u_int = gs**2 * int_u2
    om_int = gs**2 * int_uom
    with np.errstate(divide="ignore", invalid="ignore"):
        cu = np.where(u_int > 0, (u_low - heat) / u_int, -np.inf)
        co = np.where(om_int > 0, (om_low - gs * heat) / om_int, -np.inf)
    return LowFreqReport(
        times=ts,
        u_lhs=u_low,
        u_heat=heat,
        u_int=u_int,
        om_lhs=om_low,
        om_heat=gs * heat,
        om_int=om_int,
        smallest_viable_C_u=float(max(cu.max(), 0.0)),
        smallest_viable_C_omega=float(max(co.max(), 0.0)),
    )


# ---------------------------------------------------------------------------
# power-law fitting


@dataclass
class FitResult:
    exponent: float
    prefactor: float
    r2: float
    n_samples: int

    def is_power_law(self, r2_min: float = 0.95) -> bool:
        return self.r2 >= r2_min


def fit_decay(times, values, window: tuple[float, float]) -> FitResult:
    """Least-squares slope of ``log(value)`` against ``log(1 + t)``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = window
    mask = (t >= lo) & (t <= hi)
    t, v = t[mask], v[mask]
    if t.size < 8:
        raise ValueError(f"need at least 8 samples in window, got {t.size}")
    if np.any(v <= 0):
        raise ValueError("power-law fit requires positive values")
    x = np.log1p(t)
    y = np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return FitResult(float(slope), float(math.exp(intercept)), r2, int(t.size))


# ---------------------------------------------------------------------------
# aggregate report


@dataclass
class NormReport:
    """Named norm battery at one instant."""

    t: float
    values: dict[str, float]

    def __post_init__(self) -> None:
        for k, val in self.values.items():
            if not np.isfinite(val) or val < 0:
                raise ValueError(f"norm {k} is not a finite nonnegative value: {val}")

    def to_row(self) -> dict:
        return {"t": self.t, **self.values}


def norm_report(
    u0, delta: float = 0.5, eps: float = 0.25, t: float = 0.0, t_grid=None
) -> NormReport:
    """Standard battery on horizontal data (used by the norms CLI command)."""
    vals = {
        "l2_global": mixed_norm(u0, 2, 0.0),
        "linf_v_l2_h": mixed_norm(u0, np.inf, 0.0),
        "l2_v_l2_h": mixed_norm(u0, 2, 0.0),
        "gradh_linf_v_l2_h": _gradh_mixed_inf(u0),
        "besov_minus_delta_sq": besov_minus_delta(u0, delta, t_grid),
        "besov_minus1_inf": besov_minus1_inf(u0, t_grid),
        "N_lifted": N_functional_lifted(u0, eps),
    }
    return NormReport(t=t, values=vals)
