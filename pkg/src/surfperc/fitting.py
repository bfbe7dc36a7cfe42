"""Least-squares fits and scaling analysis for the simulation output.

Models are deliberately few: a log(x) + b and a exp(b x) + c discriminate
the lifetime regimes, a x^-b extracts the first-loss width exponent, and
a x + b covers plain calibration lines.  Crossing points of success-rate
curves locate thresholds; the data-collapse score turns the usual visual
collapse judgement into a number that can be scanned and asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FitError",
    "FitResult",
    "fit",
    "crossing_point",
    "CrossingResult",
    "zero_crossing",
    "collapse_quality",
    "collapse_scan",
    "delta_exponent",
    "fit_threshold_ansatz",
]

MODELS = ("log", "exp", "power", "linear")


class FitError(RuntimeError):
    """Fit could not be produced; the message carries diagnostics."""


@dataclass(frozen=True)
class FitResult:
    model: str
    params: tuple[float, ...]
    rmse: float
    n_points: int

    def __post_init__(self):
        if self.rmse < 0 or not all(math.isfinite(p) for p in self.params):
            raise FitError(f"non-finite fit result: {self}")

    def predict(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.model == "log":
            return p[0] * np.log(x) + p[1]
        if self.model == "exp":
            return p[0] * np.exp(p[1] * x) + p[2]
        if self.model == "power":
            return p[0] * x ** (-p[1])
        if self.model == "linear":
            return p[0] * x + p[1]
        raise FitError(f"unknown model {self.model!r}")


def _parse_points(points):
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise ValueError("points must be a sequence of (x, y) or (x, y, weight)")
    x, y = arr[:, 0], arr[:, 1]
    w = arr[:, 2] if arr.shape[1] == 3 else np.ones_like(x)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    return x, y, w


def _wlsq(design, y, w):
    sw = np.sqrt(w)
    a = design * sw[:, None]
    b = y * sw
    try:
        params, *_ = np.linalg.lstsq(a, b, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"singular design matrix: {exc}") from exc
    if np.linalg.matrix_rank(a) < design.shape[1]:
        raise FitError("singular design matrix: rank-deficient inputs")
    return params


def _rmse(resid, w):
    return float(np.sqrt(np.sum(w * resid**2) / np.sum(w)))


def _gauss_newton(residual, jacobian, p0, w, max_iter=100, tol=1e-10):
    p = np.asarray(p0, dtype=float)
    sse = float(np.sum(w * residual(p) ** 2))
    for _ in range(max_iter):
        r = residual(p)
        jac = jacobian(p)
        a = jac * w[:, None]
        try:
            step = np.linalg.lstsq(a.T @ jac, -(a.T @ r), rcond=None)[0]
        except np.linalg.LinAlgError as exc:
            raise FitError(f"singular normal equations in Gauss-Newton: {exc}") from exc
        scale = 1.0
        for _half in range(30):
            cand = p + scale * step
            new_sse = float(np.sum(w * residual(cand) ** 2))
            if new_sse <= sse or not math.isfinite(sse):
                break
            scale *= 0.5
        else:
            return p  # no further descent possible
        rel = np.max(np.abs(scale * step) / np.maximum(np.abs(cand), 1e-300))
        p, sse = cand, new_sse
        if rel < tol:
            return p
    raise FitError(
        f"Gauss-Newton did not converge in {max_iter} iterations "
        f"(last params {tuple(p)}, sse {sse:.3e})")


def fit(model: str, points, max_iter: int = 100) -> FitResult:
    """Weighted least-squares fit of one model kind.

    'log' and 'linear' are solved in closed form; 'exp' starts from a
    log-linear estimate and is refined by Gauss-Newton (tolerance 1e-10 on
    the relative parameter change); 'power' is a log-log line refined the
    same way.  Raises FitError on singular designs or non-convergence.
    """
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    x, y, w = _parse_points(points)
    n_params = {"log": 2, "exp": 3, "power": 2, "linear": 2}[model]
    if len(x) < n_params:
        raise ValueError(f"{model} fit needs at least {n_params} points, got {len(x)}")

    if model == "log":
        if np.any(x <= 0):
            raise ValueError("log model requires x > 0")
        design = np.column_stack([np.log(x), np.ones_like(x)])
        a, b = _wlsq(design, y, w)
        resid = a * np.log(x) + b - y
        return FitResult("log", (float(a), float(b)), _rmse(resid, w), len(x))

    if model == "linear":
        design = np.column_stack([x, np.ones_like(x)])
        a, b = _wlsq(design, y, w)
        resid = a * x + b - y
        return FitResult("linear", (float(a), float(b)), _rmse(resid, w), len(x))

    if model == "power":
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("power model requires x > 0 and y > 0")
        design = np.column_stack([np.log(x), np.ones_like(x)])
        slope, intercept = _wlsq(design, np.log(y), w)
        p0 = (math.exp(intercept), -slope)

        def residual(p):
            return p[0] * x ** (-p[1]) - y

        def jacobian(p):
            xp = x ** (-p[1])
            return np.column_stack([xp, -p[0] * xp * np.log(x)])

        p = _gauss_newton(residual, jacobian, p0, w, max_iter=max_iter)
        return FitResult("power", tuple(map(float, p)), _rmse(residual(p), w), len(x))

    # exponential a exp(b x) + c
    span = float(np.max(y) - np.min(y))
    best = None
    for c0 in (0.0, float(np.min(y)) - max(0.05 * span, 1e-3)):
        shifted = y - c0
        if np.any(shifted <= 0):
            continue
        try:
            slope, intercept = _wlsq(
                np.column_stack([x, np.ones_like(x)]), np.log(shifted), w)
        except FitError:
            continue
        cand = (math.exp(intercept), slope, c0)
        sse = float(np.sum(w * (cand[0] * np.exp(cand[1] * x) + cand[2] - y) ** 2))
        if best is None or sse < best[1]:
            best = (cand, sse)
    if best is None:
        best = ((span if span > 0 else 1.0, 0.1, float(np.min(y))), math.inf)

    def residual(p):
        return p[0] * np.exp(p[1] * x) + p[2] - y

    def jacobian(p):
        e = np.exp(p[1] * x)
        return np.column_stack([e, p[0] * x * e, np.ones_like(x)])

    p = _gauss_newton(residual, jacobian, best[0], w, max_iter=max_iter)
    return FitResult("exp", tuple(map(float, p)), _rmse(residual(p), w), len(x))


@dataclass(frozen=True)
class CrossingResult:
    p_c: float
    err: float
    pair_crossings: tuple[float, ...]


def _pair_roots(p1, v1, p2, v2):
    lo = max(p1.min(), p2.min())
    hi = min(p1.max(), p2.max())
    if hi <= lo:
        return []
    grid = np.unique(np.concatenate([p1, p2]))
    grid = grid[(grid >= lo) & (grid <= hi)]
    if len(grid) < 2:
        return []
    diff = np.interp(grid, p1, v1) - np.interp(grid, p2, v2)
    roots = []
    for i in range(len(grid) - 1):
        a, b = diff[i], diff[i + 1]
        if a == 0.0 and b == 0.0:
            continue  # degenerate overlap, not an isolated crossing
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0.0:
            t = a / (a - b)
            roots.append(float(grid[i] + t * (grid[i + 1] - grid[i])))
    if diff[-1] == 0.0 and (len(diff) < 2 or diff[-2] != 0.0):
        roots.append(float(grid[-1]))
    return roots


def crossing_point(curves: dict) -> CrossingResult:
    """Locate where per-size curves intersect.

    ``curves`` maps a label (e.g. the distance) to (p, value) or
    (p, value, err) arrays.  All pairwise crossings of the linearly
    interpolated curves are collected; each pair contributes its root
    closest to the global median, and the mean and spread across pairs are
    returned.  Raises FitError when no pair crosses in range.
    """
    if len(curves) < 2:
        raise ValueError("need at least two curves")
    series = {}
    for key, cols in curves.items():
        p = np.asarray(cols[0], dtype=float)
        v = np.asarray(cols[1], dtype=float)
        order = np.argsort(p)
        series[key] = (p[order], v[order])
    keys = sorted(series)
    per_pair = {}
    for i, ka in enumerate(keys):
        for kb in keys[i + 1:]:
            roots = _pair_roots(*series[ka], *series[kb])
            if roots:
                per_pair[(ka, kb)] = roots
    if not per_pair:
        raise FitError("no crossing in range")
    median = float(np.median([r for roots in per_pair.values() for r in roots]))
    picks = [min(roots, key=lambda r: abs(r - median)) for roots in per_pair.values()]
    return CrossingResult(float(np.mean(picks)), float(np.std(picks)), tuple(picks))


def zero_crossing(x, y) -> float:
    """First sign change of y(x) located by linear interpolation."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x)
    x, y = x[order], y[order]
    for i in range(len(x) - 1):
        if y[i] == 0.0:
            return float(x[i])
        if y[i] * y[i + 1] < 0.0:
            t = y[i] / (y[i] - y[i + 1])
            return float(x[i] + t * (x[i + 1] - x[i]))
    if y[-1] == 0.0:
        return float(x[-1])
    raise FitError("no crossing in range")


def _rescaled(data, p_c, nu, beta):
    out = {}
    for d, cols in data.items():
        p = np.asarray(cols[0], dtype=float)
        r = np.asarray(cols[1], dtype=float)
        u = (p - p_c) * d ** (1.0 / nu)
        v = r * d ** (beta / nu)
        order = np.argsort(u)
        out[d] = (u[order], v[order])
    return out


def collapse_quality(data: dict, p_c: float, nu: float, beta: float) -> float:
    """Mean squared deviation of each distance's rescaled points from the
    piecewise-linear master curve through all other distances' points.

    ``data`` maps distance -> (p, R).  Points falling outside the other
    distances' u-range are skipped; if nothing overlaps the score is inf.
    """
    if len(data) < 3:
        raise ValueError("collapse needs at least three distances")
    scaled = _rescaled(data, p_c, nu, beta)
    sq_sum, count = 0.0, 0
    for d, (u, v) in scaled.items():
        others = [scaled[e] for e in scaled if e != d]
        mu = np.concatenate([o[0] for o in others])
        mv = np.concatenate([o[1] for o in others])
        order = np.argsort(mu)
        mu, mv = mu[order], mv[order]
        inside = (u >= mu[0]) & (u <= mu[-1])
        if not np.any(inside):
            continue
        pred = np.interp(u[inside], mu, mv)
        sq_sum += float(np.sum((v[inside] - pred) ** 2))
        count += int(np.sum(inside))
    return sq_sum / count if count else math.inf


def collapse_scan(data: dict, p_c_values, nu_values, beta: float):
    """Grid scan of the collapse score; returns (best_p_c, best_nu, score,
    score_grid) with score_grid indexed [i_pc, i_nu]."""
    p_c_values = np.asarray(p_c_values, dtype=float)
    nu_values = np.asarray(nu_values, dtype=float)
    grid = np.empty((len(p_c_values), len(nu_values)))
    for i, pc in enumerate(p_c_values):
        for j, nu in enumerate(nu_values):
            grid[i, j] = collapse_quality(data, pc, nu, beta)
    i, j = np.unravel_index(np.argmin(grid), grid.shape)
    return float(p_c_values[i]), float(nu_values[j]), float(grid[i, j]), grid


def delta_exponent(samples: dict, n_bootstrap: int = 200, seed: int = 1234):
    """Width exponent of the first-loss distribution.

    ``samples`` maps distance -> array of first-loss rates.  The standard
    deviation per distance is fit to a d^-b; returns (b, b_err, FitResult)
    with the error from a bootstrap over samples.  Requires >= 4 distances
    with >= 100 samples each.
    """
    if len(samples) < 4:
        raise ValueError("need at least four distances")
    ds = sorted(samples)
    arrays = {d: np.asarray(samples[d], dtype=float) for d in ds}
    for d, arr in arrays.items():
        if len(arr) < 100:
            raise ValueError(f"need >= 100 samples per distance, d={d} has {len(arr)}")
    points = [(d, float(np.std(arrays[d], ddof=1))) for d in ds]
    res = fit("power", points)
    rng = np.random.default_rng(seed)
    boots = []
    for _ in range(n_bootstrap):
        pts = []
        for d in ds:
            arr = arrays[d]
            resample = arr[rng.integers(0, len(arr), len(arr))]
            pts.append((d, float(np.std(resample, ddof=1))))
        try:
            boots.append(fit("power", pts).params[1])
        except FitError:
            continue
    err = float(np.std(boots)) if boots else math.nan
    return float(res.params[1]), err, res


def fit_threshold_ansatz(points, order: int = 3) -> tuple[float, ...]:
    """Fit the reintegration coefficients alpha(1..order) to simulated
    thresholds (p_s, p_x_c), under the normalization sum(alpha) = 1.

    Inverts each threshold to an effective reintegration probability
    ps_eff = p_x_c / (1 - p_x_c) and solves the constrained linear least
    squares for the polynomial coefficients.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be (p_s, p_x_c) pairs")
    ps = pts[:, 0]
    pxc = pts[:, 1]
    if np.any(pxc >= 1.0):
        raise ValueError("thresholds must be < 1")
    target = pxc / (1.0 - pxc) - ps  # subtract the alpha_1 = 1 baseline
    design = np.column_stack([ps**j - ps for j in range(2, order + 1)])
    rest, *_ = np.linalg.lstsq(design, target, rcond=None)
    alpha1 = 1.0 - float(np.sum(rest))
    return (alpha1, *map(float, rest))
