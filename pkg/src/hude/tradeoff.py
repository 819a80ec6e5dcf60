"""Statistical-computational trade-off curves.

KL divergences over the forced two-by-two coupling, the constrained ratio
objective whose infimum lower-bounds any list-of-points data structure, a
grid-plus-refinement minimizer for that objective, the closed-form lower and
upper curves, and CSV emission of all of them on a common sample-ratio axis.

Conventions: natural logarithms throughout, 0*log(0) = 0, and +inf sentinels
for divergences of non-absolutely-continuous pairs (they propagate through
min/max arithmetic without exceptions).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .instances import required_w_q

LOG2 = math.log(2.0)

__all__ = [
    "kl_binary",
    "coupling_kl",
    "objective",
    "objective_from_divergences",
    "stationarity_residual",
    "entropy_gap",
    "SearchOptions",
    "InfimumResult",
    "minimize_objective",
    "LowerBoundResult",
    "query_exponent_lower_bound",
    "gapss_explicit_bound",
    "analytic_lower_bound",
    "reduction_w_q",
    "upper_exponent",
    "TradeoffPoint",
    "tradeoff_rows",
    "format_tradeoff_csv",
    "parse_tradeoff_csv",
    "write_tradeoff_csv",
    "read_tradeoff_csv",
]


def _xlog_ratio(x, ref):
    """x * log(x / ref) with the 0*log(0) = 0 convention; +inf when ref == 0 < x."""
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * np.log(x / ref)
    out = np.where(x == 0.0, 0.0, out)
    out = np.where((x > 0.0) & (ref == 0.0), np.inf, out)
    return out


def kl_binary(p, q):
    """KL divergence between Bernoulli(p) and Bernoulli(q), natural log."""
    p_arr = np.asarray(p, dtype=np.float64)
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any((p_arr < 0) | (p_arr > 1)):
        raise ValueError("first argument must lie in [0, 1]")
    if np.any((q_arr < 0) | (q_arr > 1)):
        raise ValueError("second argument must lie in [0, 1]")
    out = _xlog_ratio(p_arr, q_arr) + _xlog_ratio(1.0 - p_arr, 1.0 - q_arr)
    if out.ndim == 0:
        return float(out)
    return out


def coupling_kl(t_q, t_u, w_q, w_u):
    """KL divergence of the forced coupling against the instance joint law.

    Both joints share the zero upper-right cell, so the divergence is the sum
    over the three supported cells (t_q, t_u - t_q, 1 - t_u) against
    (w_q, w_u - w_q, 1 - w_u).
    """
    out = (
        _xlog_ratio(t_q, w_q)
        + _xlog_ratio(np.asarray(t_u, dtype=np.float64) - t_q, w_u - w_q)
        + _xlog_ratio(1.0 - np.asarray(t_u, dtype=np.float64), 1.0 - w_u)
    )
    if out.ndim == 0:
        return float(out)
    return out


def objective(t_q, t_u, w_q, w_u, alpha):
    """The constrained ratio objective, expanded form.

    [(t_u-t_q) log((t_u-t_q)/(w_u-w_q)) + alpha*d(t_u||w_u) - t_u log(t_u/w_u)
     - alpha*d(t_q||w_q) + t_q log(t_q/w_q)] / d(t_u||w_u)

    The denominator vanishes at t_u == w_u, which is excluded from the domain.
    """
    t_u_arr = np.asarray(t_u, dtype=np.float64)
    if np.any(t_u_arr == w_u):
        raise ValueError("objective undefined at t_u == w_u (zero denominator)")
    den = kl_binary(t_u_arr, w_u)
    num = (
        _xlog_ratio(t_u_arr - np.asarray(t_q, dtype=np.float64), w_u - w_q)
        + alpha * den
        - _xlog_ratio(t_u_arr, w_u)
        - alpha * kl_binary(t_q, w_q)
        + _xlog_ratio(t_q, w_q)
    )
    out = num / den
    if np.ndim(out) == 0:
        return float(out)
    return out


def objective_from_divergences(t_q, t_u, w_q, w_u, alpha):
    """Independent coding of the same objective, straight from its definition:

    [alpha*(D - d(t_q||w_q)) + (1-alpha)*(D - d(t_u||w_u))] / d(t_u||w_u)
    with D the coupling divergence.  Used to cross-check :func:`objective`.
    """
    t_u_arr = np.asarray(t_u, dtype=np.float64)
    if np.any(t_u_arr == w_u):
        raise ValueError("objective undefined at t_u == w_u (zero denominator)")
    big = coupling_kl(t_q, t_u_arr, w_q, w_u)
    d_u = kl_binary(t_u_arr, w_u)
    d_q = kl_binary(t_q, w_q)
    out = (alpha * (big - d_q) + (1.0 - alpha) * (big - d_u)) / d_u
    if np.ndim(out) == 0:
        return float(out)
    return out


def stationarity_residual(t_q, t_u, w_q, w_u, alpha) -> float:
    """Log residual of the interior first-order condition in the t_q direction:

    log((t_u-t_q)/(w_u-w_q)) - (1-alpha) log(t_q/w_q) - alpha log((1-t_q)/(1-w_q)).
    Zero at interior minimizers.
    """
    return float(
        math.log((t_u - t_q) / (w_u - w_q))
        - (1.0 - alpha) * math.log(t_q / w_q)
        - alpha * math.log((1.0 - t_q) / (1.0 - w_q))
    )


def entropy_gap(x, return_boundary: bool = False):
    """x log(2x) + (1-x) log(2(1-x)); equals kl_binary(x, 1/2).

    At the boundary points 0 and 1 the limit value log 2 is returned (the
    optional second output flags that the limit convention was used).
    """
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise ValueError("argument must lie in [0, 1]")
    boundary = (x_arr == 0.0) | (x_arr == 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x_arr * np.log(2.0 * x_arr) + (1.0 - x_arr) * np.log(2.0 * (1.0 - x_arr))
    out = np.where(boundary, LOG2, out)
    if out.ndim == 0:
        out = float(out)
        return (out, bool(boundary)) if return_boundary else out
    return (out, boundary) if return_boundary else out


# ---------------------------------------------------------------------------
# Constrained minimization of the objective over the feasible triangle
# ---------------------------------------------------------------------------


_EDGE_MARGIN = 1e-9  # grids stay this far inside the t_q < t_u edge


@dataclass(frozen=True)
class SearchOptions:
    """Grid densities and tolerances for the objective minimization."""

    tu_points: int = 401
    tq_points: int = 241
    exclude_band: float = 1e-4  # primary exclusion half-width around t_u == w_u
    inner_band: float = 1e-6  # secondary pass resolves down to this distance
    refine_rounds: int = 70
    tu_tol: float = 1e-7
    tq_rel_tol: float = 1e-8


@dataclass(frozen=True)
class InfimumResult:
    value: float
    t_q: float
    t_u: float
    tq_boundary: bool  # minimizer sits on the t_q = 0 edge
    near_band: bool  # minimizer within the secondary band around t_u = w_u


def _tu_axis(w_q: float, w_u: float, opts: SearchOptions) -> np.ndarray:
    pieces = [
        np.linspace(0.0, 1.0, opts.tu_points),
        w_u - np.geomspace(opts.exclude_band, min(0.25, w_u), 48),
        w_u + np.geomspace(opts.exclude_band, min(0.25, 1.0 - w_u), 48),
        np.asarray([0.0, 1.0]),
    ]
    axis = np.unique(np.concatenate(pieces))
    axis = axis[(axis >= 0.0) & (axis <= 1.0)]
    return axis[np.abs(axis - w_u) >= opts.exclude_band]


def _tq_axis(w_q: float, w_u: float, opts: SearchOptions) -> np.ndarray:
    # Geometric coverage of (0, 1] with extra density around w_q, where the
    # interior stationary point lives, plus the exact boundary point 0.
    pieces = [
        np.asarray([0.0]),
        np.geomspace(1e-12, 1.0, opts.tq_points),
        w_q * np.geomspace(0.08, 12.5, 49),
    ]
    axis = np.unique(np.concatenate(pieces))
    return axis[(axis >= 0.0) & (axis <= 1.0)]


def _terms_on_axes(tq_axis: np.ndarray, tu_axis: np.ndarray, w_q: float, w_u: float):
    """Alpha-independent pieces of the objective on an outer grid.

    By the KL chain rule the two numerator gaps have cancellation-free forms
        D - d(t_u||w_u) = t_u * d(t_q/t_u || w_q/w_u)
        D - d(t_q||w_q) = (1-t_q) * d((t_u-t_q)/(1-t_q) || (w_u-w_q)/(1-w_q)),
    both manifestly nonnegative, which keeps the ratio meaningful even next
    to the excluded band, where the naive expansion loses all precision.
    Pointwise the objective is affine in alpha:
        F = alpha * g_q + (1 - alpha) * g_u
    with g_q, g_u the two gaps over d(t_u||w_u).  Infeasible points carry
    g_q = +inf, g_u = 0.
    """
    tu_col = tu_axis[:, None]
    tq_row = tq_axis[None, :]
    feasible = (tq_row == 0.0) | (tq_row <= tu_col - _EDGE_MARGIN)
    d_u = kl_binary(tu_col, w_u)
    # The conditional divergences are nonnegative exactly; flooring them at 0
    # removes sign noise that the 1/d_u amplification would otherwise blow up.
    with np.errstate(divide="ignore", invalid="ignore"):
        cond_q = np.where(tu_col > 0.0, tq_row / np.where(tu_col > 0.0, tu_col, 1.0), 0.0)
        gap_u = tu_col * np.maximum(kl_binary(np.clip(cond_q, 0.0, 1.0), w_q / w_u), 0.0)
        cond_u = (tu_col - tq_row) / (1.0 - tq_row)
        gap_q = (1.0 - tq_row) * np.maximum(
            kl_binary(np.clip(cond_u, 0.0, 1.0), (w_u - w_q) / (1.0 - w_q)), 0.0
        )
        g_q = gap_q / d_u
        g_u = gap_u / d_u
    g_q = np.where(feasible, g_q, np.inf)
    g_u = np.where(feasible, g_u, 0.0)
    return g_q, g_u


def _min_on_axes(tq_axis, tu_axis, w_q, w_u, alpha):
    g_q, g_u = _terms_on_axes(np.asarray(tq_axis), np.asarray(tu_axis), w_q, w_u)
    values = alpha * g_q + (1.0 - alpha) * g_u
    flat = int(np.argmin(values))
    iu, iq = np.unravel_index(flat, values.shape)
    return float(values[iu, iq]), float(tq_axis[iq]), float(tu_axis[iu]), (iu, iq)


def _objective_scalar(t_q: float, t_u: float, w_q: float, w_u: float, alpha: float) -> float:
    """Pure-scalar objective for the polish loop (feasible interior assumed).

    Uses the chain-rule split of the numerator (see _terms_on_axes), which
    stays accurate arbitrarily close to the excluded band.
    """

    def xlr(x: float, ref: float) -> float:
        return 0.0 if x == 0.0 else x * math.log(x / ref)

    def kl(x: float, ref: float) -> float:
        return xlr(x, ref) + xlr(1.0 - x, 1.0 - ref)

    d_u = kl(t_u, w_u)
    gap_u = 0.0
    if t_u > 0.0:
        gap_u = t_u * max(kl(min(max(t_q / t_u, 0.0), 1.0), w_q / w_u), 0.0)
    gap_q = 0.0
    if t_q < 1.0:
        cond = min(max((t_u - t_q) / (1.0 - t_q), 0.0), 1.0)
        gap_q = (1.0 - t_q) * max(kl(cond, (w_u - w_q) / (1.0 - w_q)), 0.0)
    return (alpha * gap_q + (1.0 - alpha) * gap_u) / d_u


def _golden_min(fun, lo: float, hi: float, iters: int = 80):
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if b - a <= 1e-14 * max(abs(a), abs(b), 1e-12):
            break
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = fun(x2)
    return (x1, f1) if f1 < f2 else (x2, f2)


def _inner_tq(t_u: float, w_q: float, w_u: float, alpha: float) -> float:
    """Exact inner minimizer over t_q at fixed t_u.

    The t_q-derivative of the objective's numerator,
        h(t_q) = log(t_q/w_q) - log((t_u-t_q)/(w_u-w_q))
                 - alpha log(t_q(1-w_q)/(w_q(1-t_q))),
    is strictly increasing on (0, t_u) for alpha in [0, 1], so the inner
    minimum is either its unique root (bisection in log space) or the t_q = 0
    boundary when h is nonnegative throughout (possible only at alpha = 1).
    """
    if t_u <= 0.0:
        return 0.0

    def h(t_q: float) -> float:
        return (
            math.log(t_q / w_q)
            - math.log((t_u - t_q) / (w_u - w_q))
            - alpha * math.log(t_q * (1.0 - w_q) / (w_q * (1.0 - t_q)))
        )

    lo = math.log(max(t_u * 1e-18, 1e-280))
    hi = math.log(t_u) + math.log1p(-1e-14)
    if h(math.exp(lo)) >= 0.0:
        return 0.0
    if h(math.exp(hi)) <= 0.0:
        return math.exp(hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if h(math.exp(mid)) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15:
            break
    return math.exp(0.5 * (lo + hi))


def _polish(
    w_q: float,
    w_u: float,
    alpha: float,
    value: float,
    t_q: float,
    t_u: float,
    band: float,
    tu_bounds: tuple[float, float],
):
    """Polish the grid minimizer: exact inner t_q solve, golden outer t_u search.

    Stays on the side of the excluded band that the grid phase selected;
    windows around t_u expand when the outer minimum pins to a window edge.
    """
    lo_u, hi_u = tu_bounds
    side_lo, side_hi = (lo_u, w_u - band) if t_u < w_u else (w_u + band, hi_u)
    side_lo = max(side_lo, 0.0)
    side_hi = min(side_hi, 1.0)

    def outer(u: float) -> float:
        return _objective_scalar(_inner_tq(u, w_q, w_u, alpha), u, w_q, w_u, alpha)

    best_u = t_u
    width = 2e-3
    for _ in range(40):
        lo = max(best_u - width, side_lo)
        hi = min(best_u + width, side_hi)
        if lo >= hi:
            break
        x, fx = _golden_min(outer, lo, hi)
        if fx < value:
            value, best_u = fx, x
        interior = lo + 1e-13 < x < hi - 1e-13
        if interior or (lo == side_lo and hi == side_hi):
            break
        width *= 2.0
    cand_q = _inner_tq(best_u, w_q, w_u, alpha)
    if _objective_scalar(cand_q, best_u, w_q, w_u, alpha) <= value:
        t_q, t_u = cand_q, best_u
    return value, t_q, t_u


def _refine(
    w_q: float,
    w_u: float,
    alpha: float,
    value: float,
    t_q: float,
    t_u: float,
    opts: SearchOptions,
    band: float,
    tu_window: float,
    tu_bounds: tuple[float, float] = (0.0, 1.0),
):
    """Nested local grids around the current best point, then a polish pass.

    The t_u window is linear; the t_q window is multiplicative so that tiny
    interior minimizers (t_q of the order of w_q or below) are localized to
    relative, not absolute, precision.  Windows recenter and expand when the
    minimum lands on a window edge, and shrink otherwise.
    """
    tq_mult = 8.0
    lo, hi = tu_bounds
    for _ in range(opts.refine_rounds):
        tu_axis = np.clip(np.linspace(t_u - tu_window, t_u + tu_window, 17), lo, hi)
        tu_axis = np.unique(tu_axis)
        tu_axis = tu_axis[np.abs(tu_axis - w_u) >= band]
        if tu_axis.size == 0:
            break
        if t_q > 0.0:
            factors = np.geomspace(1.0 / (1.0 + tq_mult), 1.0 + tq_mult, 17)
            tq_axis = np.unique(np.clip(t_q * factors, 0.0, 1.0))
            if t_q * factors[0] <= 1e-11:
                tq_axis = np.concatenate([[0.0], tq_axis])
        else:
            tq_axis = np.concatenate([[0.0], np.geomspace(1e-15, 1e-2, 14)])
        cand_value, cand_tq, cand_tu, (iu, iq) = _min_on_axes(tq_axis, tu_axis, w_q, w_u, alpha)
        moved_to_edge = iu in (0, tu_axis.size - 1) or iq in (0, tq_axis.size - 1)
        if cand_value < value:
            value, t_q, t_u = cand_value, cand_tq, cand_tu
        if moved_to_edge:
            tu_window = min(tu_window * 1.8, 0.5)
            tq_mult = min(tq_mult * 1.8, 64.0)
        else:
            tu_window *= 0.35
            tq_mult *= 0.45
        if tu_window < opts.tu_tol and (t_q == 0.0 or tq_mult < opts.tq_rel_tol):
            break
    return _polish(w_q, w_u, alpha, value, t_q, t_u, band, tu_bounds)


def minimize_objective(
    w_q: float,
    w_u: float,
    alpha: float,
    opts: SearchOptions | None = None,
) -> InfimumResult:
    """Global minimum of the objective over {0 <= t_q <= t_u <= 1, t_u != w_u}.

    Coarse product grid (log-spaced in t_q, dense near t_q ~ w_q and near the
    excluded band in t_u), nested local refinement, then a secondary pass
    that sweeps the annulus inner_band <= |t_u - w_u| <= exclude_band to
    confirm the infimum is not hiding next to the removed line.
    """
    if not 0.0 < w_q < w_u < 1.0:
        raise ValueError("parameters must satisfy 0 < w_q < w_u < 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    opts = opts or SearchOptions()

    tu_axis = _tu_axis(w_q, w_u, opts)
    tq_axis = _tq_axis(w_q, w_u, opts)
    value, t_q, t_u, _ = _min_on_axes(tq_axis, tu_axis, w_q, w_u, alpha)
    spacing = 2.0 / max(opts.tu_points - 1, 1)
    value, t_q, t_u = _refine(
        w_q, w_u, alpha, value, t_q, t_u, opts, opts.exclude_band, spacing
    )

    # Secondary pass: resolve the excluded band down to inner_band.
    steps = np.geomspace(opts.inner_band, opts.exclude_band, 33)
    band_axis = np.unique(np.concatenate([w_u - steps, w_u + steps]))
    band_axis = band_axis[(band_axis > 0.0) & (band_axis < 1.0)]
    b_value, b_tq, b_tu, _ = _min_on_axes(tq_axis, band_axis, w_q, w_u, alpha)
    b_value, b_tq, b_tu = _refine(
        w_q,
        w_u,
        alpha,
        b_value,
        b_tq,
        b_tu,
        opts,
        opts.inner_band,
        opts.exclude_band,
        tu_bounds=(w_u - opts.exclude_band, w_u + opts.exclude_band),
    )
    near_band = False
    if b_value < value:
        value, t_q, t_u = b_value, b_tq, b_tu
        near_band = True
    return InfimumResult(value, t_q, t_u, t_q == 0.0, near_band)


# ---------------------------------------------------------------------------
# The numeric lower-bound curve: maximize over the weight alpha
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LowerBoundResult:
    rho_q: float
    alpha: float
    alpha_boundary: bool  # maximizer pinned at the smallest alpha grid point
    clamped: bool  # raw bound fell outside [0, 1]
    infimum: InfimumResult


def query_exponent_lower_bound(
    w_q: float,
    w_u: float,
    rho_u: float,
    opts: SearchOptions | None = None,
    alpha_points: int = 101,
) -> LowerBoundResult:
    """Best achievable bound rho_q >= max_alpha (inf F(alpha) - (1-alpha) rho_u)/alpha.

    The alpha grid always contains 1 + 1/log(w_q) (the theoretically
    motivated weight) when it lies in (0, 1); a golden-section pass refines
    around the grid maximizer.  The result is clamped to [0, 1].
    """
    if rho_u < 0:
        raise ValueError("space exponent must be nonnegative")
    if not 0.0 < w_q < w_u < 1.0:
        raise ValueError("parameters must satisfy 0 < w_q < w_u < 1")
    opts = opts or SearchOptions()

    tu_axis = _tu_axis(w_q, w_u, opts)
    tq_axis = _tq_axis(w_q, w_u, opts)
    g_q, g_u = _terms_on_axes(tq_axis, tu_axis, w_q, w_u)
    spacing = 2.0 / max(opts.tu_points - 1, 1)

    def infimum_at(alpha: float) -> InfimumResult:
        values = alpha * g_q + (1.0 - alpha) * g_u
        flat = int(np.argmin(values))
        iu, iq = np.unravel_index(flat, values.shape)
        value, t_q, t_u = _refine(
            w_q,
            w_u,
            alpha,
            float(values[iu, iq]),
            float(tq_axis[iq]),
            float(tu_axis[iu]),
            opts,
            opts.exclude_band,
            spacing,
        )
        return InfimumResult(value, t_q, t_u, t_q == 0.0, False)

    def bound_at(alpha: float) -> tuple[float, InfimumResult]:
        inf_res = infimum_at(alpha)
        return (inf_res.value - (1.0 - alpha) * rho_u) / alpha, inf_res

    alphas = np.linspace(0.01, 1.0, alpha_points)
    alpha_theory = 1.0 + 1.0 / math.log(w_q)
    if 0.0 < alpha_theory < 1.0:
        alphas = np.unique(np.concatenate([alphas, [alpha_theory]]))

    best_alpha = None
    best_value = -math.inf
    best_inf = None
    for alpha in alphas.tolist():
        value, inf_res = bound_at(alpha)
        if value > best_value:
            best_value, best_alpha, best_inf = value, alpha, inf_res

    # Golden-section refinement around the grid maximizer.
    order = alphas.tolist()
    pos = order.index(best_alpha)
    lo = order[max(pos - 1, 0)]
    hi = order[min(pos + 1, len(order) - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    for _ in range(28):
        if b - a < 1e-6:
            break
        x1 = b - phi * (b - a)
        x2 = a + phi * (b - a)
        v1, inf1 = bound_at(x1)
        v2, inf2 = bound_at(x2)
        if v1 > best_value:
            best_value, best_alpha, best_inf = v1, x1, inf1
        if v2 > best_value:
            best_value, best_alpha, best_inf = v2, x2, inf2
        if v1 < v2:
            a = x1
        else:
            b = x2

    # Re-resolve the infimum at the winning alpha with full band handling and
    # recompute the bound from it, so the reported value reflects the band
    # pass too (a smaller infimum can only weaken, never fake, the bound).
    final_inf = minimize_objective(w_q, w_u, best_alpha, opts)
    assert best_inf is not None
    if best_inf.value < final_inf.value:
        final_inf = replace(
            final_inf,
            value=best_inf.value,
            t_q=best_inf.t_q,
            t_u=best_inf.t_u,
            tq_boundary=best_inf.tq_boundary,
        )
    raw = (final_inf.value - (1.0 - best_alpha) * rho_u) / best_alpha
    boundary = best_alpha == order[0]
    clamped = not 0.0 <= raw <= 1.0
    rho_q = min(1.0, max(0.0, raw))
    return LowerBoundResult(rho_q, float(best_alpha), boundary, clamped, final_inf)


# ---------------------------------------------------------------------------
# Closed-form curves
# ---------------------------------------------------------------------------


def gapss_explicit_bound(w_q: float, rho_u: float) -> float:
    """Explicit lower bound at query density w_q (small-density regime):

    1 - w_q^{1 - log 2} + rho_u / (1 + log w_q), vanishing-order terms dropped.
    """
    if not 0.0 < w_q < 1.0 / math.e:
        raise ValueError("query density must lie in (0, 1/e)")
    return 1.0 - w_q ** (1.0 - LOG2) + rho_u / (1.0 + math.log(w_q))


def analytic_lower_bound(s: float, rho_u: float) -> float:
    """Closed-form lower bound on the query exponent at sample ratio s:

    1 - s^{-(1 - log 2)} - rho_u / (log s - 1), vanishing-order terms dropped.
    """
    if s <= math.e:
        raise ValueError("sample-ratio parameter must exceed e")
    return 1.0 - s ** -(1.0 - LOG2) - rho_u / (math.log(s) - 1.0)


def reduction_w_q(s: float, w_u: float = 0.5) -> float:
    """Query density matched to sample ratio s: w_u * (1 - e^{-1/(s*w_u)})."""
    return required_w_q(w_u, s)


def upper_exponent(s: float, rho_u: float, epsilon: float, simplified: bool = False) -> float:
    """Query-time exponent achieved by the probe-subset index.

    Exact form 1 + rho_u log(1 - eps/2) / log(2/(1 - e^{-2/s})); the
    simplified form replaces both logs by their bounds, giving
    1 - eps*rho_u / (2 log(2s)).  At eps = 2 the exact power term diverges
    to -inf and the exponent is clamped at 0.
    """
    if s < 2:
        raise ValueError("sample-ratio parameter must be at least 2")
    if not 0 < epsilon <= 2:
        raise ValueError("separation must be in (0, 2]")
    if rho_u < 0:
        raise ValueError("space exponent must be nonnegative")
    if simplified:
        return 1.0 - epsilon * rho_u / (2.0 * math.log(2.0 * s))
    if epsilon == 2.0:
        return 0.0 if rho_u > 0 else 1.0
    base = 2.0 / -math.expm1(-2.0 / s)
    return 1.0 + rho_u * math.log1p(-epsilon / 2.0) / math.log(base)


# ---------------------------------------------------------------------------
# Curve emission
# ---------------------------------------------------------------------------

CURVES = (
    "numeric-lop",
    "analytic-lower",
    "explicit-gapss",
    "upper-half-uniform",
    "upper-simplified",
    "prior-general",
)

DEFAULT_CURVES = (
    "numeric-lop",
    "analytic-lower",
    "upper-half-uniform",
    "upper-simplified",
)


@dataclass(frozen=True)
class TradeoffPoint:
    curve: str
    s: float
    inv_s: float
    w_q: float
    rho_u: float
    rho_q: float
    flags: str = ""


def _clamp_unit(value: float, flags: list[str]) -> float:
    if not 0.0 <= value <= 1.0:
        flags.append("clamped")
        return min(1.0, max(0.0, value))
    return value


def tradeoff_rows(
    rho_u: float,
    s_values,
    epsilon: float = 1.0,
    w_u: float = 0.5,
    curves=DEFAULT_CURVES,
    prior_constant: float | None = None,
    opts: SearchOptions | None = None,
    alpha_points: int = 101,
) -> list[TradeoffPoint]:
    """One row per (sample ratio, curve); query densities follow the reduction map.

    The prior-general curve (1 - const * eps^2 / s) needs its leading
    constant supplied explicitly; only an asymptotic order is published for
    it, so no default is invented here.
    """
    unknown = set(curves) - set(CURVES)
    if unknown:
        raise ValueError(f"unknown curves: {sorted(unknown)}")
    if "prior-general" in curves and prior_constant is None:
        raise ValueError("prior-general curve needs an explicit prior_constant")
    rows: list[TradeoffPoint] = []
    for s in s_values:
        s = float(s)
        w_q = reduction_w_q(s, w_u)
        for curve in curves:
            flags: list[str] = []
            if curve == "numeric-lop":
                res = query_exponent_lower_bound(
                    w_q, w_u, rho_u, opts=opts, alpha_points=alpha_points
                )
                rho_q = res.rho_q
                if res.alpha_boundary:
                    flags.append("alpha-boundary")
                if res.clamped:
                    flags.append("clamped")
            elif curve == "analytic-lower":
                flags.append("o1-dropped")
                rho_q = _clamp_unit(analytic_lower_bound(s, rho_u), flags)
            elif curve == "explicit-gapss":
                flags.append("o1-dropped")
                rho_q = _clamp_unit(gapss_explicit_bound(w_q, rho_u), flags)
            elif curve == "upper-half-uniform":
                if epsilon == 2.0:
                    flags.append("eps2-clamped")
                rho_q = _clamp_unit(upper_exponent(s, rho_u, epsilon), flags)
            elif curve == "upper-simplified":
                rho_q = _clamp_unit(upper_exponent(s, rho_u, epsilon, simplified=True), flags)
            else:  # prior-general
                flags.append("user-constant")
                rho_q = _clamp_unit(1.0 - prior_constant * epsilon**2 / s, flags)
            rows.append(
                TradeoffPoint(curve, s, 1.0 / s, w_q, rho_u, rho_q, ";".join(flags))
            )
    return rows


CSV_HEADER = "curve,s,inv_s,w_q,rho_u,rho_q,flags"


def format_tradeoff_csv(rows: list[TradeoffPoint]) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.curve},{r.s!r},{r.inv_s!r},{r.w_q!r},{r.rho_u!r},{r.rho_q!r},{r.flags}"
        )
    return "\n".join(lines) + "\n"


def parse_tradeoff_csv(text: str) -> list[TradeoffPoint]:
    lines = [line for line in text.split("\n") if line]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or malformed trade-off CSV header")
    rows = []
    for line in lines[1:]:
        curve, s, inv_s, w_q, rho_u, rho_q, flags = line.split(",")
        rows.append(
            TradeoffPoint(
                curve, float(s), float(inv_s), float(w_q), float(rho_u), float(rho_q), flags
            )
        )
    return rows


def write_tradeoff_csv(rows: list[TradeoffPoint], path, metadata: dict | None = None) -> None:
    # Metadata rides in a '#' comment line so the column schema stays fixed.
    import json

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if metadata:
            fh.write("# " + json.dumps(metadata, sort_keys=True, separators=(",", ":")) + "\n")
        fh.write(format_tradeoff_csv(rows))


def read_tradeoff_csv(path) -> list[TradeoffPoint]:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    lines = [line for line in text.split("\n") if not line.startswith("#")]
    return parse_tradeoff_csv("\n".join(lines))
