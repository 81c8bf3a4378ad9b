"""Statistical experiments confronting simulation with the limit theorems.

Quenched semantics are preserved throughout: a walk realization omega is
fixed per seed, scenery draws x are taken for that fixed omega, and
x-samples are never pooled across omegas.  "For a.e. omega" is
operationalized as: run n_omegas independent walks and require the
criterion for at least a configured fraction of them.

Normalization conventions.  The rescaled process is

    Y_n(t) = S_{floor(n t)} / sqrt(C0 n log n)

so increments over (t_{j-1}, t_j] target Normal(0, phi_f(0) (t_j - t_{j-1})).
Because the self-intersection law of large numbers converges only at log
speed, distribution-shape tests standardize each increment by its exact
quenched standard deviation (computable from window local times and the
field correlations); the slowly converging level is reported separately as
a variance-ratio series.  Finite-n acceptance bands are pilot-calibrated
fixtures, never literal limits with tight tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .localtime import local_times, pair_count_tables
from .rng import derive_seed, hash_sites, splitmix64
from .scenery import (
    IIDScenery,
    MovingAverageScenery,
    SceneryModel,
    field_increments,
    is_associated,
    quenched_variance,
    spectral_density,
    window_boundaries,
)
from .walk import RECURRENT, WalkModel, WalkPath, sample_path
from . import scenery as scenery_mod

MORICZ_CMAX = (1.0 - 2.0 ** -0.25) ** -4.0
SQRT2 = math.sqrt(2.0)


@dataclass
class ExperimentConfig:
    walk: WalkModel
    scenery: SceneryModel
    n: int
    t_grid: tuple
    m_sceneries: int
    n_omegas: int
    seed: int
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = tuple(float(t) for t in self.t_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])) or not grid:
            raise ValueError("t_grid must be nonempty and strictly increasing")
        if not all(0.0 < t <= 1.0 for t in grid):
            raise ValueError("t_grid entries must lie in (0, 1]")
        self.t_grid = grid


def _omega_seed(master: int, i: int) -> int:
    return derive_seed(master, "omega", i)


def _x_seeds(master: int, i: int, m: int) -> list:
    return [derive_seed(master, "scenery", i, j) for j in range(m)]


# ---------------------------------------------------------------------------
# FCLT suite


@dataclass
class OmegaFcltStats:
    omega_index: int
    path_seed: int
    ks_stat: list           # per window
    ks_pvalue: list
    window_variance: list   # exact quenched Var of each increment
    variance_ratio: list    # exact Var / (C0 * window_len * log n * sigma2)
    offdiag: list           # corr of standardized increments, upper triangle
    offdiag_max: float      # max |corr| for this omega
    exact_var_y1: float     # quenched Var(Y_n(1)), exact counts
    mc_var_y1: float        # scenery-sample estimate of the same


@dataclass
class FcltReport:
    n: int
    t_grid: tuple
    m_sceneries: int
    n_omegas: int
    seed: int
    sigma2: float               # phi_f(0), the C0-normalized target variance
    c0: float
    c0_mode: str                # "exact" | "empirical"
    degenerate: bool
    per_omega: list
    ks_pass_fraction: list      # per window, at the ks_p threshold
    offdiag_pass_fraction: float
    pooled_offdiag: list        # per increment pair: mean corr over omegas
    pooled_offdiag_max: float   # max |pooled correlation|
    pooled_exact_var_y1: float
    pooled_mc_var_y1: float
    thresholds: dict
    passed: Optional[bool]

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["per_omega"] = [asdict(o) for o in self.per_omega]
        return doc


def _empirical_c0(model: WalkModel, n: int, seed: int, n_omegas: int) -> float:
    total = 0.0
    for i in range(n_omegas):
        path = sample_path(model, n, _omega_seed(seed, i))
        tab = local_times(path, (0, n))
        total += float(np.dot(tab.counts, tab.counts)) / (n * math.log(n))
    return total / n_omegas


def run_fclt(config: ExperimentConfig) -> FcltReport:
    """Quenched FCLT check: per-omega KS tests of the rescaled increments
    against the normal law, increment decorrelation, and variance tracking.

    Degenerate sigma^2 flips the report into collapse-tracking mode: no KS
    tests, pass/fail left undecided, variance series still reported.
    """
    model = config.walk
    if model.dimension != 2 or model.classification != RECURRENT:
        raise ValueError("run_fclt covers centered planar walks")
    if config.t_grid[-1] != 1.0:
        raise ValueError("t_grid must end at 1.0 so Y_n(1) is defined")
    tol = {"ks_p": 0.01, "ks_pass_fraction": 0.9, "offdiag_abs": 0.1,
           "offdiag_pass_fraction": 0.9, **config.tolerances}
    n = config.n
    logn = math.log(n)
    density = spectral_density(config.scenery, dimension=2)
    sigma2 = density.at_zero()
    degenerate = abs(sigma2) < 1e-12
    if model.c0 is not None:
        c0, c0_mode = model.c0, "exact"
    else:
        c0, c0_mode = _empirical_c0(model, n, config.seed, config.n_omegas), "empirical"

    edges = window_boundaries(n, config.t_grid)
    per_omega = []
    for i in range(config.n_omegas):
        path_seed = _omega_seed(config.seed, i)
        path = sample_path(model, n, path_seed)
        win_var = [quenched_variance(config.scenery, path, (edges[j], edges[j + 1]))
                   for j in range(len(edges) - 1)]
        exact_var_y1 = quenched_variance(config.scenery, path, (0, edges[-1]))
        inc = field_increments(config.scenery, path, config.t_grid,
                               _x_seeds(config.seed, i, config.m_sceneries))
        mc_var_y1 = float(inc.sum(axis=1).var(ddof=1)) / (c0 * n * logn)
        ks_stat, ks_p, ratios = [], [], []
        offdiag = []
        if not degenerate:
            z = np.empty_like(inc)
            for j, v in enumerate(win_var):
                z[:, j] = inc[:, j] / math.sqrt(v) if v > 0 else 0.0
                width = edges[j + 1] - edges[j]
                ratios.append(v / (c0 * width * logn * sigma2) if width else 0.0)
                res = stats.ks_1samp(z[:, j], stats.norm.cdf)
                ks_stat.append(float(res.statistic))
                ks_p.append(float(res.pvalue))
            if z.shape[1] > 1:
                corr = np.corrcoef(z, rowvar=False)
                iu = np.triu_indices(z.shape[1], k=1)
                offdiag = [float(c) for c in corr[iu]]
        else:
            ratios = [v / (c0 * max(edges[j + 1] - edges[j], 1) * logn)
                      for j, v in enumerate(win_var)]
        per_omega.append(OmegaFcltStats(
            omega_index=i, path_seed=path_seed, ks_stat=ks_stat, ks_pvalue=ks_p,
            window_variance=[float(v) for v in win_var],
            variance_ratio=[float(r) for r in ratios],
            offdiag=offdiag,
            offdiag_max=float(np.max(np.abs(offdiag))) if offdiag else 0.0,
            exact_var_y1=float(exact_var_y1) / (c0 * n * logn),
            mc_var_y1=mc_var_y1))

    n_windows = len(edges) - 1
    if degenerate:
        ks_pass = [0.0] * n_windows
        off_pass = 1.0
        pooled_off = []
        pooled_off_max = 0.0
        passed = None
    else:
        ks_pass = [float(np.mean([o.ks_pvalue[j] > tol["ks_p"] for o in per_omega]))
                   for j in range(n_windows)]
        off_pass = float(np.mean([o.offdiag_max < tol["offdiag_abs"] for o in per_omega]))
        # pooling over omegas averages the sampling noise out of each pair's
        # correlation estimate; the pooled value is the criterion statistic
        offmat = np.array([o.offdiag for o in per_omega])
        pooled_off = [float(v) for v in offmat.mean(axis=0)] if offmat.size else []
        pooled_off_max = float(np.max(np.abs(pooled_off))) if pooled_off else 0.0
        passed = (all(f >= tol["ks_pass_fraction"] for f in ks_pass)
                  and pooled_off_max < tol["offdiag_abs"])
    return FcltReport(
        n=n, t_grid=config.t_grid, m_sceneries=config.m_sceneries,
        n_omegas=config.n_omegas, seed=config.seed, sigma2=sigma2, c0=c0,
        c0_mode=c0_mode, degenerate=degenerate, per_omega=per_omega,
        ks_pass_fraction=ks_pass, offdiag_pass_fraction=off_pass,
        pooled_offdiag=pooled_off, pooled_offdiag_max=pooled_off_max,
        pooled_exact_var_y1=float(np.mean([o.exact_var_y1 for o in per_omega])),
        pooled_mc_var_y1=float(np.mean([o.mc_var_y1 for o in per_omega])),
        thresholds=tol, passed=passed)


@dataclass
class VarianceLadderReport:
    """Var(Y_n(1)) along an n-ladder (degenerate-scenery collapse witness)."""

    n_ladder: list
    pooled_exact_var_y1: list
    degenerate: list
    decreasing: bool
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# LLN trackers


@dataclass
class LlnReport:
    n_ladder: list
    p_set: list
    n_omegas: int
    c0: float
    mean_ratio: dict      # (n, p) -> mean of V_n(omega, p)/(C0 n log n)
    std_ratio: dict
    max_ratio: dict       # empirical stand-in for the a.e.-finite K(omega)
    trend_to_one: dict    # p -> |mean - 1| along the ladder

    def to_dict(self) -> dict:
        return {
            "n_ladder": list(self.n_ladder), "p_set": [list(p) for p in self.p_set],
            "n_omegas": self.n_omegas, "c0": self.c0,
            "mean_ratio": {f"{n}|{p}": v for (n, p), v in self.mean_ratio.items()},
            "std_ratio": {f"{n}|{p}": v for (n, p), v in self.std_ratio.items()},
            "max_ratio": {f"{n}|{p}": v for (n, p), v in self.max_ratio.items()},
            "trend_to_one": {str(p): v for p, v in self.trend_to_one.items()},
        }


def track_variance_lln(model: WalkModel, n_ladder: Sequence[int], p_set,
                       n_omegas: int, seed: int) -> LlnReport:
    """V_n(omega, p) / (C0 n log n) along an n-ladder; the limit is 1 for
    every p.  Prefix windows of a single path per omega keep the ladder
    internally consistent (common random numbers)."""
    if model.dimension != 2 or not model.centered or model.classification != RECURRENT:
        raise ValueError("the V_n law of large numbers needs a centered planar walk")
    if model.c0 is None:
        raise ValueError("need strongly aperiodic walk (exact C0); use the "
                         "empirical mode of run_fclt otherwise")
    n_ladder = sorted(int(n) for n in n_ladder)
    p_set = [tuple(int(c) for c in p) for p in p_set]
    ratios = {(n, p): [] for n in n_ladder for p in p_set}
    for i in range(n_omegas):
        path = sample_path(model, n_ladder[-1], _omega_seed(seed, i))
        for n in n_ladder:
            tab = local_times(path, (0, n))
            denom = model.c0 * n * math.log(n)
            for p in p_set:
                if any(p):
                    v = pair_count_tables(tab, tab, p)
                else:
                    v = int(np.dot(tab.counts, tab.counts))
                ratios[(n, p)].append(v / denom)
    mean_r = {k: float(np.mean(v)) for k, v in ratios.items()}
    std_r = {k: float(np.std(v, ddof=1)) if len(v) > 1 else 0.0 for k, v in ratios.items()}
    max_r = {k: float(np.max(v)) for k, v in ratios.items()}
    trend = {p: [abs(mean_r[(n, p)] - 1.0) for n in n_ladder] for p in p_set}
    return LlnReport(n_ladder=n_ladder, p_set=p_set, n_omegas=n_omegas,
                     c0=model.c0, mean_ratio=mean_r, std_ratio=std_r,
                     max_ratio=max_r, trend_to_one=trend)


@dataclass
class OrthogonalityReport:
    n_ladder: list
    windows: tuple                 # (A, B, C, D)
    p_set: list
    n_omegas: int
    normalized: dict               # (n, p) -> list over omegas of V/( n log n)
    mean_normalized: dict
    endpoint_decrease_fraction: dict  # p -> fraction of omegas with last < first

    def to_dict(self) -> dict:
        return {
            "n_ladder": list(self.n_ladder), "windows": list(self.windows),
            "p_set": [list(p) for p in self.p_set], "n_omegas": self.n_omegas,
            "mean_normalized": {f"{n}|{p}": v for (n, p), v in self.mean_normalized.items()},
            "endpoint_decrease_fraction": {str(p): v for p, v
                                           in self.endpoint_decrease_fraction.items()},
        }


def check_increment_orthogonality(model: WalkModel, n_ladder: Sequence[int],
                                  windows, p_set, n_omegas: int, seed: int
                                  ) -> OrthogonalityReport:
    """Cross-interval coincidence counts V(omega, [nA, nB), [nC, nD), p),
    normalized by n log n; asymptotic orthogonality drives them to 0."""
    a, b, c, d = windows
    if not 0.0 < a < b < c < d < 1.0:
        raise ValueError("need 0 < A < B < C < D < 1")
    n_ladder = sorted(int(n) for n in n_ladder)
    p_set = [tuple(int(x) for x in p) for p in p_set]
    series = {(n, p): [] for n in n_ladder for p in p_set}
    for i in range(n_omegas):
        path = sample_path(model, n_ladder[-1], _omega_seed(seed, i))
        for n in n_ladder:
            tab_i = local_times(path, (int(n * a), int(n * b)))
            tab_j = local_times(path, (int(n * c), int(n * d)))
            for p in p_set:
                v = pair_count_tables(tab_i, tab_j, p)
                series[(n, p)].append(v / (n * math.log(n)))
    mean_norm = {k: float(np.mean(v)) for k, v in series.items()}
    dec = {}
    for p in p_set:
        first = np.array(series[(n_ladder[0], p)])
        last = np.array(series[(n_ladder[-1], p)])
        dec[p] = float(np.mean(last < first))
    return OrthogonalityReport(n_ladder=n_ladder, windows=tuple(windows),
                               p_set=p_set, n_omegas=n_omegas,
                               normalized={k: [float(x) for x in v]
                                           for k, v in series.items()},
                               mean_normalized=mean_norm,
                               endpoint_decrease_fraction=dec)


# ---------------------------------------------------------------------------
# maximal inequalities


def _visit_values(scen: SceneryModel, path: WalkPath, x_seeds, chunk: int = 512
                  ) -> np.ndarray:
    """Per-visit field values X_{Z_j}, shape (m, n). i.i.d. and MA variants."""
    pos = path.positions
    if isinstance(scen, IIDScenery):
        shifts = {(0,) * path.model.dimension: 1.0}
        law = scen.law
    elif isinstance(scen, MovingAverageScenery):
        shifts = scen.coeffs
        law = scen.law
    else:
        raise ValueError("per-visit evaluation supports i.i.d. and moving-average sceneries")
    bases = [(a, hash_sites(0, pos - np.asarray(q, dtype=np.int64)))
             for q, a in shifts.items()]
    out = np.zeros((len(x_seeds), path.n))
    for lo in range(0, len(x_seeds), chunk):
        seeds = x_seeds[lo:lo + chunk]
        block = np.zeros((len(seeds), path.n))
        for a, base in bases:
            words = np.empty((len(seeds), path.n), dtype=np.uint64)
            for r, s in enumerate(seeds):
                words[r] = splitmix64(base ^ np.uint64(s & (2**64 - 1)))
            block += a * law.values(words)
        out[lo:lo + len(seeds)] = block
    return out


@dataclass
class NewmanWrightReport:
    lambdas: list
    lhs: list          # mu(max_k |S_k| >= lambda ||S_n||)
    rhs: list          # 2 mu(|S_n| >= (lambda - sqrt 2) ||S_n||)
    lhs_se: list
    rhs_se: list
    margins: list      # rhs - lhs
    violations: list   # margin < -3 * combined SE
    l2_norm: float
    m_sceneries: int

    def to_dict(self) -> dict:
        return asdict(self)


def check_newman_wright(scen: SceneryModel, path: WalkPath, lambda_grid,
                        m_sceneries: int = 10000, x_seed: int = 0) -> NewmanWrightReport:
    """Maximal inequality for associated summands along the fixed path:

        mu(max |S_k| >= lam ||S_n||_2) <= 2 mu(|S_n| >= (lam - sqrt 2) ||S_n||_2)

    Rejects sceneries without an association certificate.  Both sides are
    Monte Carlo estimates with binomial standard errors; ||S_n||_2 is exact
    from the counting layer.
    """
    if not is_associated(scen):
        raise ValueError("scenery is not certified associated (i.i.d. or "
                         "single-signed moving average required)")
    l2 = math.sqrt(quenched_variance(scen, path, (0, path.n)))
    vals = _visit_values(scen, path, _x_seeds(x_seed, 0, m_sceneries))
    cs = np.cumsum(vals, axis=1)
    max_abs = np.max(np.abs(cs), axis=1)
    s_n = cs[:, -1]
    lhs, rhs, lhs_se, rhs_se, margins, viol = [], [], [], [], [], []
    m = m_sceneries
    for lam in lambda_grid:
        p_l = float(np.mean(max_abs >= lam * l2))
        p_r_raw = float(np.mean(np.abs(s_n) >= (lam - SQRT2) * l2))
        p_r = 2.0 * p_r_raw
        se_l = math.sqrt(max(p_l * (1 - p_l), 1e-12) / m)
        se_r = 2.0 * math.sqrt(max(p_r_raw * (1 - p_r_raw), 1e-12) / m)
        margin = p_r - p_l
        lhs.append(p_l)
        rhs.append(p_r)
        lhs_se.append(se_l)
        rhs_se.append(se_r)
        margins.append(margin)
        viol.append(margin < -3.0 * math.hypot(se_l, se_r))
    return NewmanWrightReport(lambdas=[float(x) for x in lambda_grid], lhs=lhs,
                              rhs=rhs, lhs_se=lhs_se, rhs_se=rhs_se,
                              margins=margins, violations=viol, l2_norm=l2,
                              m_sceneries=m_sceneries)


def _window_v_table(path: WalkPath, n: int) -> np.ndarray:
    """V(omega, [b, b+k)) for all 0 <= b <= b+k <= n, O(n^2) incremental."""
    v = np.zeros((n + 1, n + 1))  # v[b, k]
    pos = [tuple(p) for p in path.positions[:n]]
    for b in range(n):
        counts = {}
        acc = 0
        for k in range(1, n - b + 1):
            site = pos[b + k - 1]
            w = counts.get(site, 0)
            acc += 2 * w + 1
            counts[site] = w + 1
            v[b, k] = acc
    return v


def _fourth_moment_window(path: WalkPath, law, b: int, k: int) -> float:
    """Exact E |S_{[b,b+k)}|^4 for an i.i.d. scenery from window local times:
    3 (E X^2)^2 sum_{l1 != l2} w^2 w^2 + E X^4 sum_l w^4."""
    tab = local_times(path, (b, b + k))
    w2 = tab.counts.astype(np.float64) ** 2
    v = float(w2.sum())
    w4 = float((w2**2).sum())
    return 3.0 * law.moment(2) ** 2 * (v * v - w4) + law.fourth_moment * w4


@dataclass
class MoriczReport:
    n: int
    g0_kind: str
    super_additive: bool
    hypothesis_ok: bool         # E S^4 <= G0^2 on all checked windows
    hypothesis_worst: float     # min of G0^2 - E S^4 over checked windows
    windows: list               # dyadic (b, k) used for the maximum bound
    m4_estimates: list          # E max^4 per window (Monte Carlo)
    m4_se: list
    bounds: list                # C_max * G0(b,k)^2
    margins: list               # bound - estimate
    worst_margin_se_units: float
    violations: int
    m_sceneries: int

    def to_dict(self) -> dict:
        return asdict(self)


def check_moricz(scen: SceneryModel, path: WalkPath, n: int,
                 g0_kind: str = "self_intersection", m_sceneries: int = 4000,
                 x_seed: int = 0) -> MoriczReport:
    """Fourth-moment maximal bound E max_k |S_{b,k}|^4 <= C_max G0(b,n)^2
    with C_max = (1 - 2^{-1/4})^{-4}.

    The hypothesis E |S_{b,k}|^4 <= G0(b,k)^2 is verified EXACTLY (local
    times and law moments, no Monte Carlo) on every window of the dyadic
    grid, and super-additivity of G0 is verified exhaustively over all
    index triples.  Only the max-moment side is estimated.
    """
    if n > path.n:
        raise ValueError("n exceeds the path length")
    if not isinstance(scen, IIDScenery):
        raise ValueError("exact fourth-moment verification needs an i.i.d. scenery")
    law = scen.law
    v_table = _window_v_table(path, n)
    if g0_kind == "sqrt3k":
        g0 = np.sqrt(3.0) * np.tile(np.arange(n + 1, dtype=np.float64), (n + 1, 1))
    elif g0_kind == "self_intersection":
        g0 = 2.0 * math.sqrt(law.fourth_moment) * v_table
    else:
        raise ValueError("g0_kind must be 'sqrt3k' or 'self_intersection'")

    super_additive = _check_super_additive(g0, n)

    windows = []
    j = 0
    while 2**j <= n:
        k = 2**j
        for b in range(0, n - k + 1, k):
            windows.append((b, k))
        j += 1
    hyp_margins = []
    for b, k in windows:
        m4 = _fourth_moment_window(path, law, b, k)
        hyp_margins.append(g0[b, k] ** 2 - m4)
    hypothesis_ok = all(m >= -1e-6 for m in hyp_margins)

    vals = _visit_values(scen, path, _x_seeds(x_seed, 0, m_sceneries))[:, :n]
    cs = np.concatenate([np.zeros((m_sceneries, 1)), np.cumsum(vals, axis=1)], axis=1)
    big = [w for w in windows if w[1] >= 8]  # max over a single step carries no info
    est, ses, bounds, margins = [], [], [], []
    worst_units = math.inf
    viol = 0
    for b, k in big:
        seg = np.abs(cs[:, b + 1:b + k + 1] - cs[:, b:b + 1])
        m4s = np.max(seg, axis=1) ** 4
        e = float(m4s.mean())
        se = float(m4s.std(ddof=1) / math.sqrt(m_sceneries))
        bound = MORICZ_CMAX * g0[b, k] ** 2
        est.append(e)
        ses.append(se)
        bounds.append(float(bound))
        margins.append(float(bound - e))
        units = (bound - e) / se if se > 0 else math.inf
        worst_units = min(worst_units, units)
        if bound - e < -3.0 * se:
            viol += 1
    return MoriczReport(n=n, g0_kind=g0_kind, super_additive=super_additive,
                        hypothesis_ok=hypothesis_ok,
                        hypothesis_worst=float(min(hyp_margins)),
                        windows=[list(w) for w in big], m4_estimates=est,
                        m4_se=ses, bounds=bounds, margins=margins,
                        worst_margin_se_units=float(worst_units),
                        violations=viol, m_sceneries=m_sceneries)


def _check_super_additive(g0: np.ndarray, n: int) -> bool:
    """G0(b,k) + G0(b+k,l) <= G0(b,k+l) for every b, k, l; exhaustive."""
    if float(np.max(np.abs(g0[:, 0]))) > 1e-12:
        return False
    for b in range(n - 1):
        rest = n - b
        ks = np.arange(1, rest)
        ls = np.arange(1, rest)
        tot = ks[:, None] + ls[None, :]
        valid = tot <= rest
        lhs = g0[b, ks][:, None] + g0[b + ks][:, ls]
        rhs = g0[b, np.minimum(tot, rest)]
        if np.any((lhs - rhs)[valid] > 1e-9):
            return False
    return True


# ---------------------------------------------------------------------------
# tightness


@dataclass
class TightnessReport:
    n: int
    epsilon: float
    delta_ladder: list
    grid_points: int
    estimates: dict        # delta -> mean over omegas of mu(modulus >= eps)
    per_omega: dict        # delta -> list
    monotone_in_delta: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "epsilon": self.epsilon,
                "delta_ladder": list(self.delta_ladder),
                "grid_points": self.grid_points,
                "estimates": {str(k): v for k, v in self.estimates.items()},
                "per_omega": {str(k): v for k, v in self.per_omega.items()},
                "monotone_in_delta": self.monotone_in_delta}


def estimate_tightness_modulus(config: ExperimentConfig, delta_ladder,
                               epsilon: float, grid_points: int = 128) -> TightnessReport:
    """Empirical mu(sup_{|t'-t|<=delta} |Y_n(t') - Y_n(t)| >= eps) per delta.

    The sup over t is approximated on a grid of ``grid_points`` strides;
    halving the stride must not change conclusions (grid_points is exposed
    for exactly that check).
    """
    model = config.walk
    c0 = model.c0 if model.c0 is not None else _empirical_c0(
        model, config.n, config.seed, config.n_omegas)
    n = config.n
    scale = math.sqrt(c0 * n * math.log(n))
    grid = [(i + 1) / grid_points for i in range(grid_points)]
    deltas = sorted(float(d) for d in delta_ladder)
    per_omega = {d: [] for d in deltas}
    for i in range(config.n_omegas):
        path = sample_path(model, n, _omega_seed(config.seed, i))
        inc = field_increments(config.scenery, path, grid,
                               _x_seeds(config.seed, i, config.m_sceneries))
        y = np.concatenate([np.zeros((inc.shape[0], 1)),
                            np.cumsum(inc, axis=1)], axis=1) / scale
        for d in deltas:
            w = max(1, int(round(d * grid_points)))
            mod = np.zeros(y.shape[0])
            for o in range(1, w + 1):
                if o >= y.shape[1]:
                    break
                np.maximum(mod, np.max(np.abs(y[:, o:] - y[:, :-o]), axis=1), out=mod)
            per_omega[d].append(float(np.mean(mod >= epsilon)))
    estimates = {d: float(np.mean(v)) for d, v in per_omega.items()}
    vals = [estimates[d] for d in deltas]
    return TightnessReport(n=n, epsilon=epsilon, delta_ladder=deltas,
                           grid_points=grid_points, estimates=estimates,
                           per_omega=per_omega,
                           monotone_in_delta=all(a <= b + 1e-12 for a, b
                                                 in zip(vals, vals[1:])))


# ---------------------------------------------------------------------------
# sup local time trackers


@dataclass
class ErdosTaylorReport:
    n_ladder: list
    n_omegas: int
    mean_log_ratio: dict     # n -> mean of sup w_n / (log n)^2
    quantiles_log_ratio: dict
    mean_power_ratio: dict   # n -> mean of sup w_n / n^0.1
    distance_to_limit: dict  # n -> |mean_log_ratio - 1/pi|

    def to_dict(self) -> dict:
        return {"n_ladder": list(self.n_ladder), "n_omegas": self.n_omegas,
                "mean_log_ratio": {str(k): v for k, v in self.mean_log_ratio.items()},
                "quantiles_log_ratio": {str(k): v for k, v in self.quantiles_log_ratio.items()},
                "mean_power_ratio": {str(k): v for k, v in self.mean_power_ratio.items()},
                "distance_to_limit": {str(k): v for k, v in self.distance_to_limit.items()}}


def track_erdos_taylor(model: WalkModel, n_ladder: Sequence[int], n_omegas: int,
                       seed: int, epsilon: float = 0.1) -> ErdosTaylorReport:
    """sup_l w_n / (log n)^2 along a ladder (planar limit 1/pi), plus the
    o(n^eps) witness sup_l w_n / n^eps."""
    if model.dimension != 2 or not model.centered or not model.aperiodic:
        raise ValueError("sup-local-time tracking needs a centered aperiodic planar walk")
    if model.classification == "deterministic":
        raise ValueError("deterministic walks are excluded")
    n_ladder = sorted(int(n) for n in n_ladder)
    sup = {n: [] for n in n_ladder}
    for i in range(n_omegas):
        path = sample_path(model, n_ladder[-1], _omega_seed(seed, i))
        for n in n_ladder:
            tab = local_times(path, (0, n))
            sup[n].append(int(tab.counts.max()))
    mean_log = {n: float(np.mean([s / math.log(n) ** 2 for s in v]))
                for n, v in sup.items()}
    quant = {n: [float(q) for q in np.quantile(
        [s / math.log(n) ** 2 for s in v], [0.1, 0.5, 0.9])] for n, v in sup.items()}
    mean_pow = {n: float(np.mean([s / n**epsilon for s in v])) for n, v in sup.items()}
    dist = {n: abs(mean_log[n] - 1.0 / math.pi) for n in n_ladder}
    return ErdosTaylorReport(n_ladder=n_ladder, n_omegas=n_omegas,
                             mean_log_ratio=mean_log, quantiles_log_ratio=quant,
                             mean_power_ratio=mean_pow, distance_to_limit=dist)


# ---------------------------------------------------------------------------
# transient variance


@dataclass
class TransientVarianceReport:
    n: int
    n_omegas: int
    m_sceneries: int
    series_value: float      # truncated series + tail correction
    series_truncated: float
    tail_estimate: float
    exact_mean: float        # mean over omegas of exact Var_x(S_n)/n
    exact_se: float
    mc_mean: float           # scenery-sampled estimate of the same
    mc_se: float
    combined_error: float
    agree: bool

    def to_dict(self) -> dict:
        return asdict(self)


def transient_variance_check(scen: SceneryModel, model: WalkModel, n: int,
                             m_sceneries: int, seed: int, n_omegas: int = 10,
                             k_max: int = 60) -> TransientVarianceReport:
    """||S_n||^2 / n against the Green-series limit for transient walks.

    Both an exact per-omega value (counts times correlations) and a scenery
    Monte Carlo estimate are produced; agreement is within the combined
    error bars (3 SE over omegas plus half the series tail, which is an
    estimate rather than a bound).
    """
    if not model.effectively_transient:
        raise ValueError("transient_variance_check needs a transient walk")
    if model.dimension < 2:
        raise ValueError("d >= 2 required (the point-mass constant vanishes there)")
    est = scenery_mod.asymptotic_variance(scen, model, k_max=k_max)
    series = est.value + est.tail_estimate
    exact_vals, mc_vals = [], []
    for i in range(n_omegas):
        path = sample_path(model, n, _omega_seed(seed, i))
        exact_vals.append(quenched_variance(scen, path, (0, n)) / n)
        inc = field_increments(scen, path, [1.0], _x_seeds(seed, i, m_sceneries))
        mc_vals.append(float(inc[:, 0].var(ddof=1)) / n)
    exact_mean = float(np.mean(exact_vals))
    exact_se = float(np.std(exact_vals, ddof=1) / math.sqrt(n_omegas)) if n_omegas > 1 else 0.0
    mc_mean = float(np.mean(mc_vals))
    mc_se = float(np.std(mc_vals, ddof=1) / math.sqrt(n_omegas)) if n_omegas > 1 else 0.0
    combined = 3.0 * mc_se + 0.5 * abs(est.tail_estimate)
    agree = abs(mc_mean - series) <= combined and abs(exact_mean - series) <= (
        3.0 * exact_se + 0.5 * abs(est.tail_estimate))
    return TransientVarianceReport(
        n=n, n_omegas=n_omegas, m_sceneries=m_sceneries, series_value=series,
        series_truncated=est.value, tail_estimate=est.tail_estimate,
        exact_mean=exact_mean, exact_se=exact_se, mc_mean=mc_mean, mc_se=mc_se,
        combined_error=combined, agree=agree)


# ---------------------------------------------------------------------------
# trig-polynomial truncation ladder (report-only)


@dataclass
class TruncationLadderReport:
    terms_ladder: list
    norm_c_dropped: list      # ||f - f_k||_c per rung
    density_sup_bound: list   # ||phi_{f - f_k}||_inf <= ||f - f_k||_c^2
    var_y1: list              # pooled exact Var(Y_n(1)) per rung

    def to_dict(self) -> dict:
        return asdict(self)


def run_truncation_ladder(config: ExperimentConfig, terms_ladder) -> TruncationLadderReport:
    """Approximation ladder for toral observables: truncate f to its largest
    coefficient pairs and report how the spectral-density bound and the
    observed variance respond.  Report-only; how faithfully the ladder
    represents the full admissible class is not asserted."""
    scen = config.scenery
    if not isinstance(scen, scenery_mod.ToralScenery):
        raise ValueError("truncation ladder applies to toral sceneries")
    model = config.walk
    c0 = model.c0
    norm_drop, bounds, var1 = [], [], []
    for terms in terms_ladder:
        fk = scen.poly.truncate_to(int(terms))
        dropped = {k: c for k, c in scen.poly.coeffs.items() if k not in fk.coeffs}
        drop_norm = float(sum(abs(c) for c in dropped.values()))
        sub = scenery_mod.ToralScenery(pair=scen.pair, poly=fk, q_mod=scen.q_mod,
                                       orbit_box=scen.orbit_box)
        vals = []
        for i in range(config.n_omegas):
            path = sample_path(model, config.n, _omega_seed(config.seed, i))
            vals.append(quenched_variance(sub, path, (0, config.n))
                        / (c0 * config.n * math.log(config.n)))
        norm_drop.append(drop_norm)
        bounds.append(drop_norm**2)
        var1.append(float(np.mean(vals)))
    return TruncationLadderReport(terms_ladder=[int(t) for t in terms_ladder],
                                  norm_c_dropped=norm_drop,
                                  density_sup_bound=bounds, var_y1=var1)
