"""Trial engine: seeded single-round and multi-round experiments.

Every trial owns an independent RNG stream derived from the master seed and
the trial index, so results are bit-identical for any worker count and
aggregation order.  The compiled kernels release the GIL, which lets a
thread pool scale across cores without any shared mutable state.
"""

from __future__ import annotations

import datetime as _dt
import json
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, _kernels, analytics, fitting, percolation
from .layout import CodeLayout, build
from .pauli import from_support, single_qubit
from .tableau import CodeState, Status

__all__ = [
    "RoundConfig",
    "TrialPlan",
    "LifetimeSample",
    "RoundSummary",
    "SingleRoundResult",
    "LifetimeResult",
    "FractionResult",
    "run_round",
    "single_round_success",
    "lifetime",
    "survival_after_rounds",
    "track_fraction",
    "bisect_first_loss",
    "bisect_samples",
    "run_experiment",
    "PRESETS",
    "derive_seed",
    "default_threads",
    "write_csv",
    "write_manifest",
]

CAUSE_NAMES = {0: "Censored", 1: "XLost", 2: "ZLost", 3: "Collapsed"}


@dataclass(frozen=True)
class RoundConfig:
    """Per-round measurement probabilities and participating families."""

    p_x: float = 0.0
    p_y: float = 0.0
    p_z: float = 0.0
    p_s: float = 0.0
    measure_plaquettes: bool = True
    measure_stars: bool = True

    def __post_init__(self):
        for name in ("p_x", "p_y", "p_z", "p_s"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.p_x + self.p_y + self.p_z > 1.0 + 1e-12:
            raise ValueError(
                f"p_x + p_y + p_z must not exceed 1, got {self.p_x + self.p_y + self.p_z}")

    @property
    def p_m(self) -> float:
        return self.p_x + self.p_y + self.p_z


@dataclass(frozen=True)
class TrialPlan:
    """Distance, trial count, round cap and master seed of one experiment."""

    distance: int
    trials: int
    rounds_max: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if self.distance < 2:
            raise ValueError(f"distance must be >= 2, got {self.distance}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.rounds_max < 1:
            raise ValueError(f"rounds_max must be >= 1, got {self.rounds_max}")


@dataclass(frozen=True)
class LifetimeSample:
    """One trial: completed rounds before the fatal round, and the cause.

    A censored trial (no loss before the cap) carries
    rounds_survived == rounds_max and cause 'Censored'.
    """

    rounds_survived: int
    cause: str


@dataclass(frozen=True)
class RoundSummary:
    pauli_measurements: int
    stabilizer_measurements: int
    status_changed: bool


@dataclass(frozen=True)
class SingleRoundResult:
    trials: int
    r: float
    r_stderr: float
    r_xbar: float
    r_xbar_stderr: float
    r_zbar: float
    r_zbar_stderr: float


@dataclass(frozen=True)
class LifetimeResult:
    """Mean lifetime with the fatal round counted (tau >= 1); censored
    trials are excluded from the mean and reported as a fraction."""

    tau: float
    tau_stderr: float
    censored_frac: float
    trials: int
    rounds: np.ndarray = field(repr=False)   # fatal round per trial (cap if censored)
    causes: np.ndarray = field(repr=False)   # status codes, 0 = censored

    @property
    def samples(self) -> list[LifetimeSample]:
        out = []
        for r, c in zip(self.rounds, self.causes):
            if c == 0:
                out.append(LifetimeSample(int(r), "Censored"))
            else:
                out.append(LifetimeSample(int(r) - 1, CAUSE_NAMES[int(c)]))
        return out


@dataclass(frozen=True)
class FractionResult:
    f_series: np.ndarray        # mean lost-edge fraction after each round
    f_stationary: float         # trailing-window mean
    f_stationary_stderr: float
    window: int
    trials: int


def default_threads() -> int:
    env = os.environ.get("SURFPERC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def derive_seed(master_seed: int, *key: int) -> int:
    """Stable 32-bit stream seed for a grid point of a sweep."""
    ss = np.random.SeedSequence((int(master_seed),) + tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _trial_seeds(master_seed: int, trials: int) -> np.ndarray:
    return np.random.SeedSequence(int(master_seed)).generate_state(
        trials, dtype=np.uint32)


def _parallel_map(worker, trials: int, threads: int | None):
    """Run worker(lo, hi) over disjoint index chunks."""
    threads = threads or default_threads()
    if threads <= 1 or trials < 2:
        worker(0, trials)
        return
    chunk = max(1, (trials + threads * 4 - 1) // (threads * 4))
    bounds = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda b: worker(*b), bounds))


# -- python-level round (object API) -----------------------------------------


def run_round(state: CodeState, layout: CodeLayout, config: RoundConfig,
              rng) -> RoundSummary:
    """One full measurement round on a CodeState.

    Sub-round A: each qubit draws one uniform against the disjoint intervals
    [0,p_x), [p_x,p_x+p_y), [p_x+p_y,p_m) to pick at most one basis.
    Sub-round B: each participating generator is measured with probability
    p_s.  Each measurement consumes one further uniform as outcome coin.
    """
    n = layout.n_qubits
    before = state.status
    pm = config.p_m
    n_pauli = n_stab = 0
    for q in range(n):
        u = rng.random()
        if u < pm:
            if u < config.p_x:
                basis = "X"
            elif u < config.p_x + config.p_y:
                basis = "Y"
            else:
                basis = "Z"
            state.measure(single_qubit(n, q, basis), coin=float(rng.random()))
            n_pauli += 1
    if config.p_s > 0.0:
        if config.measure_plaquettes:
            for sup in layout.plaquettes:
                if rng.random() < config.p_s:
                    state.measure(from_support(n, sup, "Z"), coin=float(rng.random()))
                    n_stab += 1
        if config.measure_stars:
            for sup in layout.stars:
                if rng.random() < config.p_s:
                    state.measure(from_support(n, sup, "X"), coin=float(rng.random()))
                    n_stab += 1
    return RoundSummary(n_pauli, n_stab, state.status != before)


# -- compiled trial sweeps ----------------------------------------------------


def _packed(layout_or_d):
    layout = layout_or_d if isinstance(layout_or_d, CodeLayout) else build(layout_or_d)
    p = layout.packed()
    return layout, (p["n_qubits"], p["n_words"], p["plaq_z"], p["star_x"],
                    p["dplaq_x"], p["dstar_z"], p["logical_x_x"], p["logical_z_z"])


def single_round_success(plan: TrialPlan, config: RoundConfig,
                         threads: int | None = None,
                         crosscheck: bool = False) -> SingleRoundResult:
    """Success rates after exactly one Pauli sub-round (p_s ignored).

    With crosscheck=True (X-only configs) every trial's survival is also
    evaluated on the connectivity graph and any disagreement raises.
    """
    if crosscheck:
        if config.p_y != 0.0 or config.p_z != 0.0:
            raise ValueError("crosscheck applies to X-only configurations")
        return _single_round_crosscheck(plan, config)
    layout, packs = _packed(plan.distance)
    seeds = _trial_seeds(plan.master_seed, plan.trials)
    status = np.empty(plan.trials, dtype=np.int64)

    def worker(lo, hi):
        for i in range(lo, hi):
            status[i] = _kernels.single_round_trial(
                *packs, config.p_x, config.p_y, config.p_z, int(seeds[i]))

    _parallel_map(worker, plan.trials, threads)
    return _rates_from_status(status)


def _rates_from_status(status: np.ndarray) -> SingleRoundResult:
    t = len(status)

    def rate(mask):
        r = float(np.mean(mask))
        return r, float(np.sqrt(max(r * (1.0 - r), 0.0) / t))

    r, re = rate(status == int(Status.ALIVE))
    rx, rxe = rate((status != int(Status.XLOST)) & (status != int(Status.COLLAPSED)))
    rz, rze = rate((status != int(Status.ZLOST)) & (status != int(Status.COLLAPSED)))
    return SingleRoundResult(t, r, re, rx, rxe, rz, rze)


def _single_round_crosscheck(plan: TrialPlan, config: RoundConfig) -> SingleRoundResult:
    layout, packs = _packed(plan.distance)
    p = layout.packed()
    seeds = _trial_seeds(plan.master_seed, plan.trials)
    status = np.empty(plan.trials, dtype=np.int64)
    for i in range(plan.trials):
        rng = np.random.default_rng(int(seeds[i]))
        mask = (rng.random(layout.n_qubits) < config.p_x).astype(np.uint8)
        alive_tab = _kernels.mask_survival(*packs, mask, True,
                                           int(rng.integers(2**31)))
        alive_perc = _kernels.uf_terminals_connected(
            p["z_edges"], p["z_n_vertices"], *p["z_terminals"], mask)
        if bool(alive_tab) != bool(alive_perc):
            raise RuntimeError(
                f"tableau/percolation mismatch at trial {i}, d={plan.distance}")
        status[i] = int(Status.ALIVE) if alive_tab else int(Status.ZLOST)
    return _rates_from_status(status)


def _lifetime_arrays(plan: TrialPlan, config: RoundConfig,
                     threads: int | None = None):
    layout, packs = _packed(plan.distance)
    seeds = _trial_seeds(plan.master_seed, plan.trials)
    rounds = np.empty(plan.trials, dtype=np.int64)
    causes = np.empty(plan.trials, dtype=np.int64)

    def worker(lo, hi):
        for i in range(lo, hi):
            r, st = _kernels.lifetime_trial(
                *packs, config.p_x, config.p_y, config.p_z, config.p_s,
                config.measure_plaquettes, config.measure_stars,
                plan.rounds_max, int(seeds[i]))
            rounds[i] = r
            causes[i] = st

    _parallel_map(worker, plan.trials, threads)
    return rounds, causes


def lifetime(plan: TrialPlan, config: RoundConfig,
             threads: int | None = None) -> LifetimeResult:
    """Mean rounds until first loss, the fatal round included (tau >= 1).

    Censored trials (alive at rounds_max) are excluded from the mean; a
    censoring fraction of 1% or more triggers a warning.
    """
    rounds, causes = _lifetime_arrays(plan, config, threads)
    lost = causes != 0
    n_lost = int(np.sum(lost))
    censored_frac = 1.0 - n_lost / plan.trials
    if n_lost == 0:
        warnings.warn("all trials censored; lifetime undefined", stacklevel=2)
        tau, err = float("nan"), float("nan")
    else:
        vals = rounds[lost].astype(float)
        tau = float(np.mean(vals))
        err = float(np.std(vals, ddof=1) / np.sqrt(n_lost)) if n_lost > 1 else 0.0
        if censored_frac >= 0.01:
            warnings.warn(
                f"censoring fraction {censored_frac:.3f} >= 1%; "
                f"increase rounds_max={plan.rounds_max}", stacklevel=2)
    return LifetimeResult(tau, err, censored_frac, plan.trials, rounds, causes)


def survival_after_rounds(plan: TrialPlan, config: RoundConfig,
                          threads: int | None = None) -> tuple[float, float]:
    """Probability of staying alive through plan.rounds_max full rounds."""
    rounds, causes = _lifetime_arrays(plan, config, threads)
    alive = causes == 0
    r = float(np.mean(alive))
    return r, float(np.sqrt(max(r * (1 - r), 0.0) / plan.trials))


def track_fraction(plan: TrialPlan, config: RoundConfig, window: int,
                   threads: int | None = None) -> FractionResult:
    """Lost-edge fraction time series for the X-vs-plaquette dynamics.

    Valid only for X-only Pauli rounds (the regime in which the fraction
    maps onto the square-lattice recursion); the trailing ``window`` rounds
    give the stationary estimate.
    """
    if config.p_y != 0.0 or config.p_z != 0.0:
        raise ValueError("fraction tracking requires an X-only configuration")
    if not 1 <= window <= plan.rounds_max:
        raise ValueError(f"window must be in 1..rounds_max, got {window}")
    layout, packs = _packed(plan.distance)
    seeds = _trial_seeds(plan.master_seed, plan.trials)
    series = np.zeros((plan.trials, plan.rounds_max))

    def worker(lo, hi):
        for i in range(lo, hi):
            _kernels.fraction_trial(*packs, config.p_x, config.p_s,
                                    plan.rounds_max, int(seeds[i]), series[i])

    _parallel_map(worker, plan.trials, threads)
    mean_series = series.mean(axis=0)
    tail = series[:, -window:].mean(axis=1)
    return FractionResult(
        mean_series, float(tail.mean()),
        float(tail.std(ddof=1) / np.sqrt(plan.trials)) if plan.trials > 1 else 0.0,
        window, plan.trials)


# -- first-loss bisection ------------------------------------------------------


def bisect_first_loss(layout: CodeLayout, measure_basis: str = "X",
                      seed: int = 0, zeta0: float = 0.25,
                      max_iter: int = 200, use_tableau: bool = False) -> float:
    """One sample of the first-loss measurement rate.

    Straddling search: start at p = 1/2, draw a fresh measured set at rate p
    each iteration, test survival (connectivity oracle by default, the
    tableau when use_tableau), move p by zeta up on survival / down on loss,
    then grow zeta by half of itself on survival and shrink it by half
    otherwise; stop when round(p*n) is unchanged between successive
    iterations.  zeta0 = 1/4 by default (the initialization is a convention;
    the sampled distribution is insensitive to it).
    """
    b = measure_basis.upper()
    if b not in ("X", "Z"):
        raise ValueError(f"measure_basis must be 'X' or 'Z', got {measure_basis!r}")
    p = layout.packed()
    n = layout.n_qubits
    if not use_tableau:
        if b == "X":
            edges, n_v, (ta, tb) = p["z_edges"], p["z_n_vertices"], p["z_terminals"]
        else:
            edges, n_v, (ta, tb) = p["x_edges"], p["x_n_vertices"], p["x_terminals"]
        val, iters, done = _kernels.bisect_sample(
            edges, n_v, ta, tb, n, zeta0, max_iter, int(seed))
        if not done:
            raise RuntimeError(
                f"bisection did not terminate in {max_iter} iterations "
                f"(d={layout.distance}, basis={b}, zeta0={zeta0}, last p={val:.6f})")
        return float(val)
    _, packs = _packed(layout)
    rng = np.random.default_rng(int(seed))
    prob, zeta, prev_m = 0.5, zeta0, -1
    for it in range(1, max_iter + 1):
        mask = (rng.random(n) < prob).astype(np.uint8)
        alive = _kernels.mask_survival(*packs, mask, b == "X",
                                       int(rng.integers(2**31)))
        if alive:
            prob += zeta
            zeta *= 1.5
        else:
            prob -= zeta
            zeta *= 0.5
        prob = min(1.0, max(0.0, prob))
        m = round(prob * n)
        if m == prev_m:
            return float(prob)
        prev_m = m
    raise RuntimeError(
        f"bisection did not terminate in {max_iter} iterations "
        f"(d={layout.distance}, basis={b}, zeta0={zeta0}, last p={prob:.6f})")


def bisect_samples(d: int, n_samples: int, master_seed: int = 0,
                   measure_basis: str = "X", zeta0: float = 0.25,
                   max_iter: int = 200, use_tableau: bool = False,
                   threads: int | None = None) -> np.ndarray:
    """Independent first-loss samples for one distance."""
    layout = build(d)
    seeds = _trial_seeds(master_seed, n_samples)
    out = np.empty(n_samples)

    def worker(lo, hi):
        for i in range(lo, hi):
            out[i] = bisect_first_loss(layout, measure_basis, int(seeds[i]),
                                       zeta0, max_iter, use_tableau)

    _parallel_map(worker, n_samples, threads)
    return out


# -- CSV + manifest output ------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header: list[str], rows) -> str:
    path = os.fspath(path)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_manifest(csv_path, *, master_seed, config, columns,
                   distances=(), started=None, finished=None, extra=None) -> str:
    """JSON run manifest next to the CSV it references."""
    csv_path = os.fspath(csv_path)
    manifest = {
        "artifact_version": __version__,
        "master_seed": int(master_seed),
        "config": config,
        "columns": list(columns),
        "layout_checksums": {str(d): build(d).checksum() for d in distances},
        "started": started or _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "finished": finished or _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "outputs": [os.path.basename(csv_path)],
    }
    if extra:
        manifest.update(extra)
    path = csv_path + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# -- experiment presets -----------------------------------------------------------

SINGLE_ROUND_COLUMNS = ["d", "p_x", "p_y", "p_z", "p_m", "trials",
                        "R", "R_stderr", "R_xbar", "R_xbar_stderr",
                        "R_zbar", "R_zbar_stderr"]
DYNAMICS_COLUMNS = ["d", "p_x", "p_y", "p_z", "p_s", "trials", "rounds_max",
                    "tau", "tau_stderr", "censored_frac"]
FRACTION_COLUMNS = ["d", "p_x", "p_s", "trials", "rounds", "window",
                    "F_sim", "F_sim_stderr", "F_recursion", "rel_err"]
BISECT_COLUMNS = ["d", "sample", "p"]
SURVIVAL_COLUMNS = ["d", "p_x", "p_y", "p_z", "p_s", "t_rounds", "trials",
                    "R", "R_stderr"]


def _grid(start, stop, step):
    count = int(round((stop - start) / step))
    return [start + k * step for k in range(count + 1)]


def sweep_single_round(distances, points, trials, master_seed,
                       threads=None, crosscheck=False, progress=None):
    """points: list of (p_x, p_y, p_z); yields SINGLE_ROUND_COLUMNS rows."""
    rows = []
    for di, d in enumerate(distances):
        for pi, (px, py, pz) in enumerate(points):
            cfg = RoundConfig(p_x=px, p_y=py, p_z=pz)
            plan = TrialPlan(d, trials, 1, derive_seed(master_seed, di, pi))
            res = single_round_success(plan, cfg, threads, crosscheck=crosscheck)
            rows.append((d, px, py, pz, cfg.p_m, trials, res.r, res.r_stderr,
                         res.r_xbar, res.r_xbar_stderr, res.r_zbar, res.r_zbar_stderr))
            if progress:
                progress(f"single-round d={d} p=({px:.4g},{py:.4g},{pz:.4g}) R={res.r:.4f}")
    return rows


def sweep_dynamics(distances, configs, trials, rounds_max, master_seed,
                   threads=None, progress=None):
    """configs: list of RoundConfig; yields DYNAMICS_COLUMNS rows."""
    rows = []
    for di, d in enumerate(distances):
        for ci, cfg in enumerate(configs):
            plan = TrialPlan(d, trials, rounds_max, derive_seed(master_seed, di, ci))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = lifetime(plan, cfg, threads)
            rows.append((d, cfg.p_x, cfg.p_y, cfg.p_z, cfg.p_s, trials,
                         rounds_max, res.tau, res.tau_stderr, res.censored_frac))
            if progress:
                progress(f"dynamics d={d} p_x={cfg.p_x:.4g} p_s={cfg.p_s:.4g} "
                         f"tau={res.tau:.3f}")
    return rows


def _preset_fig2b(o):
    distances = o.get("distances", (3, 5, 7, 9))
    grid = o.get("grid", _grid(0.0, 1.0, 0.02))
    points = [(0.0, 0.0, pz) for pz in grid]
    return SINGLE_ROUND_COLUMNS, sweep_single_round(
        distances, points, o.get("trials", 10_000), o["seed"],
        o.get("threads"), progress=o.get("progress"))


def _preset_fig4c(o):
    distances = o.get("distances", (2, 3, 5, 7))
    grid = o.get("grid", _grid(0.0, 1.0, 0.05))
    points = [(0.0, py, 0.0) for py in grid]
    return SINGLE_ROUND_COLUMNS, sweep_single_round(
        distances, points, o.get("trials", 10_000), o["seed"],
        o.get("threads"), progress=o.get("progress"))


def _preset_fig5(o):
    distances = o.get("distances", (3, 5, 7, 9))
    mix = o.get("mix", (0.72, 0.10, 0.18))
    grid = o.get("grid", _grid(0.0, 1.0, 0.05))
    points = [(mix[0] * pm, mix[1] * pm, mix[2] * pm) for pm in grid]
    return SINGLE_ROUND_COLUMNS, sweep_single_round(
        distances, points, o.get("trials", 10_000), o["seed"],
        o.get("threads"), progress=o.get("progress"))


def _preset_fig6b(o):
    distances = o.get("distances", (3, 5, 7, 9, 11, 13))
    grid = o.get("grid", _grid(0.10, 0.30, 0.02))
    p_s = o.get("p_s", 0.4)
    configs = [RoundConfig(p_x=px, p_s=p_s, measure_stars=False) for px in grid]
    return DYNAMICS_COLUMNS, sweep_dynamics(
        distances, configs, o.get("trials", 50_000), o.get("rounds_max", 100_000),
        o["seed"], o.get("threads"), progress=o.get("progress"))


def _preset_summary_e(o):
    distances = o.get("distances", (3, 5, 7, 9, 11, 13))
    p_m = o.get("p_m", 0.95)
    ps_grid = o.get("ps_grid", (0.0, 0.25, 0.5, 0.75, 1.0))
    u = p_m / 3.0
    configs = [RoundConfig(p_x=u, p_y=u, p_z=u, p_s=ps) for ps in ps_grid]
    return DYNAMICS_COLUMNS, sweep_dynamics(
        distances, configs, o.get("trials", 10_000), o.get("rounds_max", 100_000),
        o["seed"], o.get("threads"), progress=o.get("progress"))


def _preset_appb3(o):
    distances = o.get("distances", (2, 3, 4, 5))
    grid = o.get("grid", _grid(0.5, 1.0, 0.05))
    p_s = o.get("p_s", 0.1)
    # the round cap mirrors the published run; capped trials are reported
    # through censored_frac rather than entering tau
    rounds_max = o.get("rounds_max", 11)
    configs = [RoundConfig(p_y=py, p_s=p_s) for py in grid]
    return DYNAMICS_COLUMNS, sweep_dynamics(
        distances, configs, o.get("trials", 1000), rounds_max,
        o["seed"], o.get("threads"), progress=o.get("progress"))


def _preset_appc(o):
    distances = o.get("distances", (5, 7, 9))
    grid = o.get("grid", (0.02, 0.05, 0.08, 0.10, 0.12, 0.20, 0.30))
    p_s = o.get("p_s", 0.9)
    rounds = o.get("rounds", 80)
    window = o.get("window", 30)
    trials = o.get("trials", 1000)
    rows = []
    for di, d in enumerate(distances):
        for pi, px in enumerate(grid):
            cfg = RoundConfig(p_x=px, p_s=p_s, measure_stars=False)
            plan = TrialPlan(d, trials, rounds, derive_seed(o["seed"], di, pi))
            res = track_fraction(plan, cfg, window, o.get("threads"))
            f_rec = percolation.effective_fraction_fixed_point(px, p_s)
            rel = abs(res.f_stationary - f_rec) / f_rec if f_rec else 0.0
            rows.append((d, px, p_s, trials, rounds, window,
                         res.f_stationary, res.f_stationary_stderr, f_rec, rel))
            if o.get("progress"):
                o["progress"](f"fraction d={d} p_x={px:.4g} F={res.f_stationary:.4f}")
    return FRACTION_COLUMNS, rows


def _preset_appd(o):
    distances = o.get("distances", (8, 10, 12, 14, 16, 20, 24))
    n_samples = o.get("samples", 500)
    rows = []
    for di, d in enumerate(distances):
        vals = bisect_samples(d, n_samples, derive_seed(o["seed"], di),
                              o.get("measure_basis", "X"),
                              threads=o.get("threads"),
                              use_tableau=o.get("use_tableau", False))
        rows.extend((d, i, float(v)) for i, v in enumerate(vals))
        if o.get("progress"):
            o["progress"](f"bisect d={d} mean={np.mean(vals):.4f} std={np.std(vals):.5f}")
    return BISECT_COLUMNS, rows


def _preset_fig6d(o):
    distances = o.get("distances", (3, 5, 7, 9))
    grid = o.get("grid", _grid(0.30, 0.44, 0.01))
    p_s = o.get("p_s", 0.75)
    t_rounds = o.get("t_rounds", 3)
    trials = o.get("trials", 10_000)
    rows = []
    for di, d in enumerate(distances):
        for pi, px in enumerate(grid):
            cfg = RoundConfig(p_x=px, p_s=p_s, measure_stars=False)
            plan = TrialPlan(d, trials, t_rounds, derive_seed(o["seed"], di, pi))
            r, err = survival_after_rounds(plan, cfg, o.get("threads"))
            rows.append((d, px, 0.0, 0.0, p_s, t_rounds, trials, r, err))
            if o.get("progress"):
                o["progress"](f"fig6d d={d} p_x={px:.4g} R={r:.4f}")
    return SURVIVAL_COLUMNS, rows


def _preset_fig6a(o):
    ps_grid = o.get("ps_grid", (0.2, 0.4, 0.6, 0.8, 1.0))
    distances = o.get("distances", (3, 5, 7, 9, 11))
    trials = o.get("trials", 5000)
    rows = []
    for si, p_s in enumerate(ps_grid):
        center = percolation.threshold_x(p_s, "ansatz")
        grid = o.get("grid") or [round(center + k * 0.02, 6) for k in range(-3, 4)]
        grid = [g for g in grid if 0.0 < g <= 1.0]
        taus = {}
        for di, d in enumerate(distances):
            for pi, px in enumerate(grid):
                cfg = RoundConfig(p_x=px, p_s=p_s, measure_stars=False)
                plan = TrialPlan(d, trials, o.get("rounds_max", 100_000),
                                 derive_seed(o["seed"], si, di, pi))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    taus[(d, px)] = lifetime(plan, cfg, o.get("threads")).tau
        slopes = []
        for px in grid:
            res = fitting.fit("log", [(d, taus[(d, px)]) for d in distances])
            slopes.append((px, res.params[0]))
        try:
            pxc = fitting.zero_crossing([s[0] for s in slopes], [s[1] for s in slopes])
        except fitting.FitError:
            pxc = float("nan")
        rows.append((p_s, pxc, percolation.threshold_x(p_s, "ansatz"),
                     percolation.threshold_x(p_s, "meanfield")))
        if o.get("progress"):
            o["progress"](f"threshold p_s={p_s:.3g}: p_x_c={pxc:.4f}")
    return ["p_s", "p_x_c", "p_x_c_ansatz", "p_x_c_meanfield"], rows


PRESETS = {
    "fig2b": _preset_fig2b,
    "fig4c": _preset_fig4c,
    "fig5": _preset_fig5,
    "fig6a": _preset_fig6a,
    "fig6b": _preset_fig6b,
    "fig6d": _preset_fig6d,
    "summary_e": _preset_summary_e,
    "appB3": _preset_appb3,
    "appC": _preset_appc,
    "appD": _preset_appd,
}


def run_experiment(preset: str, overrides: dict | None = None,
                   out_dir: str = ".", master_seed: int = 0,
                   threads: int | None = None, progress=None) -> tuple[str, str]:
    """Run a named experiment preset; writes '<preset>.csv' plus its
    manifest into out_dir and returns both paths."""
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    opts = dict(overrides or {})
    opts.setdefault("seed", master_seed)
    opts.setdefault("threads", threads)
    if progress is not None:
        opts.setdefault("progress", progress)
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    columns, rows = PRESETS[preset](opts)
    csv_path = write_csv(os.path.join(out_dir, f"{preset}.csv"), columns, rows)
    distances = sorted({int(r[0]) for r in rows}) if columns[0] == "d" else \
        sorted(opts.get("distances", ()))
    manifest_path = write_manifest(
        csv_path, master_seed=opts["seed"],
        config={k: v for k, v in opts.items()
                if k not in ("progress", "threads") and not callable(v)},
        columns=columns, distances=distances, started=started,
        extra={"preset": preset})
    return csv_path, manifest_path
