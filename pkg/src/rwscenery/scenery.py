"""Random-field backends: i.i.d. sceneries, moving averages, and toral
automorphism fields, with spectral densities and sums along a walk path.

Scenery draws are quenched-consistent: a site's value is a pure function of
(x_seed, site), so the same site re-visited in any window yields the same
value without storing the infinite field.  The toral backend evaluates
f(A^l x) at rational points x = p/q_mod by exact integer arithmetic mod a
prime q_mod, which sidesteps the exponential floating-point error growth
of hyperbolic matrix iteration.  Whether the q_mod-lattice is a faithful
stand-in for Haar measure is checked operationally: two distinct primes
must give statistically indistinguishable reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtri
from scipy.stats import norm

from . import algebra
from .localtime import local_times
from .rng import derive_seed, hash_sites, philox_gen, splitmix64, u64_to_uniform
from .trigpoly import TrigPolynomial
from .walk import RECURRENT, WalkModel, WalkPath, green_series_table


class OrbitExitError(RuntimeError):
    """Raised when the dual-orbit scan finds no closure within its box."""


# ---------------------------------------------------------------------------
# base laws (centered; unit variance unless a derived truncation part)


class Law:
    name = "law"
    unit_variance = True
    bounded = False
    bound: Optional[float] = None

    def values(self, words: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def moment(self, k: int) -> float:
        """E X^k for k = 0..4."""
        raise NotImplementedError

    def partial_moment(self, k: int, level: float) -> float:
        """E[X^k 1_{X <= level}] for k = 0..4."""
        raise NotImplementedError

    @property
    def variance(self) -> float:
        return self.moment(2) - self.moment(1) ** 2

    @property
    def fourth_moment(self) -> float:
        return self.moment(4)

    def to_dict(self) -> dict:
        return {"name": self.name}


class Rademacher(Law):
    name = "rademacher"
    bounded = True
    bound = 1.0

    def values(self, words):
        return np.where(words >> np.uint64(63), 1.0, -1.0)

    def moment(self, k):
        return 0.0 if k % 2 else 1.0

    def partial_moment(self, k, level):
        total = 0.0
        for atom in (-1.0, 1.0):
            if atom <= level:
                total += 0.5 * atom**k
        return total


class CenteredUniform(Law):
    name = "uniform"
    bounded = True
    bound = math.sqrt(3.0)

    def values(self, words):
        return (2.0 * u64_to_uniform(words) - 1.0) * math.sqrt(3.0)

    def moment(self, k):
        # uniform on [-sqrt(3), sqrt(3)]: E X^k = 3^{k/2} / (k+1) for even k
        return 0.0 if k % 2 else 3.0 ** (k / 2.0) / (k + 1)

    def partial_moment(self, k, level):
        b = math.sqrt(3.0)
        hi = min(level, b)
        if hi <= -b:
            return 0.0
        return ((hi ** (k + 1)) - ((-b) ** (k + 1))) / (2.0 * b * (k + 1))


class Gaussian(Law):
    name = "gaussian"

    def values(self, words):
        return ndtri(u64_to_uniform(words))

    def moment(self, k):
        return {0: 1.0, 1: 0.0, 2: 1.0, 3: 0.0, 4: 3.0}[k]

    def partial_moment(self, k, level):
        # M_k = -level^{k-1} phi(level) + (k-1) M_{k-2}
        phi = norm.pdf(level)
        m = [norm.cdf(level), -phi]
        for j in range(2, k + 1):
            m.append(-(level ** (j - 1)) * phi + (j - 1) * m[j - 2])
        return m[k]


class TruncatedGaussian(Law):
    """Bounded part of a standard Gaussian at ``level``, standardized to unit
    variance.  The underlying draw is the same Gaussian word mapping, so
    comparisons across laws share randomness."""

    name = "truncated_gaussian"
    bounded = True

    def __init__(self, level: float):
        self.level = float(level)
        self._shift = norm.pdf(self.level)  # -E[g 1_{g<=L}] = phi(L)
        var = norm.cdf(self.level) - self.level * norm.pdf(self.level) - self._shift**2
        if var <= 0:
            raise ValueError("truncation level leaves no variance")
        self._scale = math.sqrt(var)
        self.bound = (abs(self.level) + self._shift) / self._scale + 1.0

    def values(self, words):
        g = ndtri(u64_to_uniform(words))
        hat = np.where(g <= self.level, g, 0.0) + self._shift
        return hat / self._scale

    def _raw(self, k):
        # E[(g 1_{g<=L} + shift)^k] via Gaussian partial moments
        g = Gaussian()
        total = 0.0
        for j in range(k + 1):
            pm = 1.0 if j == 0 else g.partial_moment(j, self.level)
            total += math.comb(k, j) * pm * self._shift ** (k - j)
        return total

    def moment(self, k):
        return self._raw(k) / self._scale**k

    def partial_moment(self, k, level):
        t = float(level)
        cut = min(self.level, t * self._scale - self._shift)
        val = 0.0
        if cut > -40.0:
            val, _ = quad(lambda g: ((g + self._shift) / self._scale) ** k * norm.pdf(g),
                          -40.0, cut)
        atom_value = self._shift / self._scale
        if atom_value <= t:
            val += atom_value**k * norm.sf(self.level)
        return val

    def to_dict(self):
        return {"name": self.name, "level": self.level}


class TruncationPart(Law):
    """One side of the pathwise split X = hat(X) + tilde(X) at ``level``.

    ``side`` is "bounded" for X 1_{X<=L} - E(X 1_{X<=L}) and "tail" for the
    complement.  Values reuse the base law's word mapping, which is what
    makes the two parts sum to the original field sample by sample.
    """

    unit_variance = False

    def __init__(self, base: Law, level: float, side: str):
        if side not in ("bounded", "tail"):
            raise ValueError("side must be 'bounded' or 'tail'")
        self.base = base
        self.level = float(level)
        self.side = side
        self.name = f"{base.name}-{side}@{level:g}"
        self._mean_below = base.partial_moment(1, self.level)
        self._mass_below = base.partial_moment(0, self.level)
        # the split bounds only the upper tail; boundedness follows the base law
        self.bounded = base.bounded
        self.bound = base.bound

    def values(self, words):
        x = self.base.values(words)
        below = x <= self.level
        if self.side == "bounded":
            return np.where(below, x, 0.0) - self._mean_below
        return np.where(below, 0.0, x) - (self.base.moment(1) - self._mean_below)

    def _indicator_raw(self, k):
        if k == 0:
            return 1.0
        pm = self.base.partial_moment(k, self.level)
        return pm if self.side == "bounded" else self.base.moment(k) - pm

    def moment(self, k):
        shift = self._mean_below if self.side == "bounded" else (
            self.base.moment(1) - self._mean_below)
        return sum(math.comb(k, j) * self._indicator_raw(j) * (-shift) ** (k - j)
                   for j in range(k + 1))

    def to_dict(self):
        return {"name": "truncation_part", "base": self.base.to_dict(),
                "level": self.level, "side": self.side}


_LAWS = {
    "rademacher": Rademacher,
    "uniform": CenteredUniform,
    "gaussian": Gaussian,
    "truncated_gaussian": TruncatedGaussian,
}


def base_law(name: str, **params) -> Law:
    if name not in _LAWS:
        raise ValueError(f"unknown law {name!r}; choose from {sorted(_LAWS)}")
    return _LAWS[name](**params)


def law_from_dict(doc: dict) -> Law:
    doc = dict(doc)
    name = doc.pop("name")
    if name == "truncation_part":
        return TruncationPart(law_from_dict(doc["base"]), doc["level"], doc["side"])
    return base_law(name, **doc)


# ---------------------------------------------------------------------------
# scenery models


@dataclass(frozen=True)
class IIDScenery:
    law: Law
    variant: str = field(init=False, default="iid")


@dataclass(frozen=True)
class MovingAverageScenery:
    law: Law
    coeffs: dict  # site tuple q -> a_q, finite
    variant: str = field(init=False, default="moving_average")

    def __post_init__(self):
        norm_coeffs = {tuple(int(c) for c in q): float(a) for q, a in self.coeffs.items()}
        object.__setattr__(self, "coeffs", norm_coeffs)

    @property
    def coeff_sum(self) -> float:
        return math.fsum(self.coeffs.values())

    @property
    def degenerate(self) -> bool:
        return abs(self.coeff_sum) < 1e-12


@dataclass(frozen=True)
class ToralScenery:
    pair: algebra.MatrixPair
    poly: TrigPolynomial
    q_mod: int
    orbit_box: int = 12

    def __post_init__(self):
        if self.poly.rho != self.pair.rho:
            raise ValueError("polynomial and matrix pair dimensions differ")
        if not _is_prime(self.q_mod):
            raise ValueError(f"q_mod = {self.q_mod} is not prime")
        if not (2**20 < self.q_mod < 2**31):
            raise ValueError("q_mod must be a prime in (2^20, 2^31) for exact "
                             "uint64 modular arithmetic")

    @property
    def variant(self) -> str:
        return "toral"


SceneryModel = Union[IIDScenery, MovingAverageScenery, ToralScenery]


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for 64-bit integers."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def iid_scenery(law="rademacher", **params) -> IIDScenery:
    if isinstance(law, str):
        law = base_law(law, **params)
    return IIDScenery(law=law)


def moving_average_scenery(coeffs: dict, law="rademacher", **params) -> MovingAverageScenery:
    if isinstance(law, str):
        law = base_law(law, **params)
    return MovingAverageScenery(law=law, coeffs=coeffs)


def toral_scenery(pair, poly, q_mod: int = 2**31 - 1, orbit_box: int = 12) -> ToralScenery:
    return ToralScenery(pair=pair, poly=poly, q_mod=q_mod, orbit_box=orbit_box)


def is_associated(scenery: SceneryModel) -> bool:
    """Association certificate: i.i.d. site values always qualify; moving
    averages qualify when the coefficients carry one common sign."""
    if isinstance(scenery, IIDScenery):
        return True
    if isinstance(scenery, MovingAverageScenery):
        vals = list(scenery.coeffs.values())
        return all(a >= 0 for a in vals) or all(a <= 0 for a in vals)
    return False


# ---------------------------------------------------------------------------
# spectral densities and correlations


@dataclass(frozen=True)
class SpectralDensity:
    """Finite Fourier table l -> a_l = <T^l f, f> with a_{-l} = a_l."""

    fourier: dict

    def __post_init__(self):
        norm_f = {tuple(int(c) for c in k): float(v) for k, v in self.fourier.items()}
        object.__setattr__(self, "fourier", norm_f)
        for k, v in norm_f.items():
            mk = tuple(-c for c in k)
            if abs(norm_f.get(mk, 0.0) - v) > 1e-9:
                raise ValueError(f"spectral table not even at {k}")

    def at_zero(self) -> float:
        return math.fsum(self.fourier.values())

    def evaluate(self, t) -> float:
        t = np.asarray(t, dtype=np.float64)
        total = 0.0
        for k, a in self.fourier.items():
            total += a * math.cos(2.0 * math.pi * float(np.dot(k, t)))
        return total


def toral_correlations(scenery: ToralScenery) -> dict:
    """All nonzero <A^l f, f> found on the orbit box, exact by character
    matching.  Hyperbolicity makes dual orbits leave the finite support, so
    the table closes; if nonzero entries reach half the box the scan is
    declared unclosed and fails.  Cached on the scenery instance.
    """
    cached = getattr(scenery, "_corr_cache", None)
    if cached is not None:
        return cached
    box = scenery.orbit_box
    table = {}
    reach = 0
    for l1 in range(-box, box + 1):
        for l2 in range(-box, box + 1):
            a = algebra.toral_correlation(scenery.pair, scenery.poly, (l1, l2))
            if abs(a) > 1e-15:
                table[(l1, l2)] = a
                reach = max(reach, abs(l1), abs(l2))
    if reach > box // 2:
        raise OrbitExitError(
            f"nonzero correlations at |l| = {reach} with scan box {box}; "
            "raise orbit_box to certify closure")
    object.__setattr__(scenery, "_corr_cache", table)
    return table


def spectral_density(scenery: SceneryModel, dimension: int = 2) -> SpectralDensity:
    if isinstance(scenery, IIDScenery):
        # constant density; the table dimension follows the ambient lattice
        return SpectralDensity({(0,) * dimension: scenery.law.variance})
    if isinstance(scenery, MovingAverageScenery):
        table = {}
        qs = list(scenery.coeffs)
        for q1 in qs:
            for q2 in qs:
                l = tuple(a - b for a, b in zip(q1, q2))
                table[l] = table.get(l, 0.0) + scenery.coeffs[q1] * scenery.coeffs[q2]
        table = {l: v for l, v in table.items() if abs(v) > 1e-15}
        if not table:
            table = {(0, 0): 0.0}
        return SpectralDensity(table)
    if isinstance(scenery, ToralScenery):
        return SpectralDensity(toral_correlations(scenery))
    raise TypeError(f"not a scenery model: {scenery!r}")


@dataclass(frozen=True)
class VarianceEstimate:
    value: float
    regime: str             # "recurrent" | "transient"
    degenerate: bool
    tail_estimate: float    # transient truncation tail; 0.0 in the recurrent case
    k_max: int = 0


def asymptotic_variance(scenery: SceneryModel, model: WalkModel,
                        k_max: int = 60) -> VarianceEstimate:
    """Recurrent planar walks: sigma^2 = phi_f(0), the variance after the
    C0 n log n normalization.  Transient walks: the series
    ||f||^2 + 2 sum_k sum_l P(Z_k = l) <T^l f, f>, truncated at k_max with
    the local-limit tail reported.  A zero value is a flagged degeneracy,
    not an error.
    """
    density = spectral_density(scenery, dimension=model.dimension)
    if model.classification == RECURRENT and model.dimension == 2:
        value = density.at_zero()
        return VarianceEstimate(value=value, regime="recurrent",
                                degenerate=abs(value) < 1e-12, tail_estimate=0.0)
    if model.effectively_transient:
        sites = sorted(density.fourier)
        table = green_series_table(model, sites, k_max=k_max)
        value = math.fsum(density.fourier[p] * table[p].value for p in sites)
        tail0 = table[sites[0]].tail_estimate
        tail = tail0 * density.at_zero()
        return VarianceEstimate(value=value, regime="transient",
                                degenerate=abs(value) < 1e-12,
                                tail_estimate=tail, k_max=k_max)
    raise ValueError("asymptotic variance covered for recurrent planar or "
                     "transient walks only")


# ---------------------------------------------------------------------------
# sums along a path


def window_boundaries(n: int, t_grid) -> list:
    grid = [float(t) for t in t_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("t_grid must be strictly increasing")
    edges = [0]
    for t in grid:
        if not 0.0 < t <= 1.0:
            raise ValueError("t_grid entries must lie in (0, 1]")
        edges.append(int(math.floor(n * t)))
    return edges


def _site_words(x_seed: int, base_words: np.ndarray) -> np.ndarray:
    """Combine precomputed per-site hashes with a scenery seed."""
    return splitmix64(base_words ^ np.uint64(x_seed & (2**64 - 1)))


class _WeightedSites:
    """Union site list with one weight column per t-grid window."""

    def __init__(self, sites: np.ndarray, weights: np.ndarray):
        self.sites = sites        # (M, d) int64
        self.weights = weights    # (M, s) float64

    @classmethod
    def from_path(cls, path: WalkPath, t_grid, coeffs: Optional[dict] = None):
        edges = window_boundaries(path.n, t_grid)
        full = local_times(path, (0, edges[-1]))
        if coeffs is None:
            sites = full.sites
            weights = np.zeros((len(full), len(edges) - 1))
            for j in range(len(edges) - 1):
                tab = local_times(path, (edges[j], edges[j + 1]))
                weights[:, j] = tab.lookup(sites)
        else:
            stacks = [full.sites - np.asarray(q, dtype=np.int64) for q in coeffs]
            sites = np.unique(np.vstack(stacks), axis=0)
            weights = np.zeros((len(sites), len(edges) - 1))
            for j in range(len(edges) - 1):
                tab = local_times(path, (edges[j], edges[j + 1]))
                col = np.zeros(len(sites))
                for q, a in coeffs.items():
                    col += a * tab.lookup(sites + np.asarray(q, dtype=np.int64))
                weights[:, j] = col
        keep = np.any(weights != 0.0, axis=1)
        return cls(sites[keep], weights[keep])


def field_increments(scenery: SceneryModel, path: WalkPath, t_grid,
                     x_seeds, chunk: int = 256) -> np.ndarray:
    """Window increments of S along the path, one row per scenery draw.

    Returns (m, s) with column j equal to
    sum_{k in [floor(n t_{j-1}), floor(n t_j))} X_{Z_k}; cumulative sums of
    rows reproduce (S_{floor(n t_j)})_j exactly.
    """
    x_seeds = [int(s) for s in x_seeds]
    if isinstance(scenery, ToralScenery):
        return _toral_increments(scenery, path, t_grid, x_seeds, chunk)
    coeffs = scenery.coeffs if isinstance(scenery, MovingAverageScenery) else None
    ws = _WeightedSites.from_path(path, t_grid, coeffs)
    base_words = hash_sites(0, ws.sites)
    out = np.zeros((len(x_seeds), ws.weights.shape[1]))
    for lo in range(0, len(x_seeds), chunk):
        seeds = x_seeds[lo:lo + chunk]
        words = np.empty((len(seeds), len(base_words)), dtype=np.uint64)
        for i, s in enumerate(seeds):
            words[i] = _site_words(s, base_words)
        out[lo:lo + len(seeds)] = scenery.law.values(words) @ ws.weights
    return out


def _toral_point(scenery: ToralScenery, x_seed: int) -> np.ndarray:
    gen = philox_gen(derive_seed(x_seed, "toral-point"))
    return gen.integers(0, scenery.q_mod, size=scenery.pair.rho, dtype=np.uint64)


def _modmat_range(mat_t: tuple, lo: int, hi: int, q: int) -> dict:
    """(M^a mod q) for a in [lo, hi], built by exact ladder multiplication."""
    rho = len(mat_t)
    m = np.asarray(mat_t, dtype=object)
    minv = np.asarray(algebra.mat_inverse_unimodular(mat_t), dtype=object)
    fwd = (m % q).astype(np.uint64)
    bwd = (minv % q).astype(np.uint64)
    out = {0: np.eye(rho, dtype=np.uint64)}
    cur = out[0]
    for a in range(1, hi + 1):
        cur = _modmatmul(cur, fwd, q)
        out[a] = cur
    cur = out[0]
    for a in range(-1, lo - 1, -1):
        cur = _modmatmul(cur, bwd, q)
        out[a] = cur
    return out


def _modmatmul(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    # entries < q < 2^31 so a 3-term dot stays below 2^64
    return (a @ b) % np.uint64(q)


def _toral_transported_freqs(scenery: ToralScenery, sites: np.ndarray) -> np.ndarray:
    """transpose(A^l) k mod q for every site l and half-support frequency k.

    Returns (M, h, rho) uint64 where h indexes one frequency per conjugate
    pair (the other half contributes the conjugate term analytically).
    """
    q = scenery.q_mod
    half = _half_support(scenery.poly)
    a1t = algebra.mat_transpose(scenery.pair.a1)
    a2t = algebra.mat_transpose(scenery.pair.a2)
    lo1, hi1 = int(sites[:, 0].min()), int(sites[:, 0].max())
    lo2, hi2 = int(sites[:, 1].min()), int(sites[:, 1].max())
    pow1 = _modmat_range(a1t, lo1, hi1, q)
    pow2 = _modmat_range(a2t, lo2, hi2, q)
    kvecs = np.asarray([k for k, _ in half], dtype=np.int64) % q  # (h, rho)
    kvecs = kvecs.astype(np.uint64)
    # u[a] = (A1^T)^a k mod q for each needed a, then v = (A2^T)^b u
    u_by_a = {a: (kvecs @ pow1[a].T) % np.uint64(q) for a in range(lo1, hi1 + 1)}
    out = np.empty((len(sites), len(half), scenery.pair.rho), dtype=np.uint64)
    for i, (a, b) in enumerate(sites):
        out[i] = (u_by_a[int(a)] @ pow2[int(b)].T) % np.uint64(q)
    return out


def _half_support(poly: TrigPolynomial) -> list:
    half = []
    seen = set()
    for k in poly.support:
        mk = tuple(-x for x in k)
        if k in seen or mk in seen:
            continue
        seen.add(k)
        half.append((k, poly.coeffs[k]))
    return half


def _toral_increments(scenery: ToralScenery, path: WalkPath, t_grid,
                      x_seeds, chunk: int) -> np.ndarray:
    edges = window_boundaries(path.n, t_grid)
    full = local_times(path, (0, edges[-1]))
    sites = full.sites
    weights = np.zeros((len(sites), len(edges) - 1))
    for j in range(len(edges) - 1):
        tab = local_times(path, (edges[j], edges[j + 1]))
        weights[:, j] = tab.lookup(sites)
    freqs = _toral_transported_freqs(scenery, sites)  # (M, h, rho)
    half = _half_support(scenery.poly)
    cre = np.asarray([2.0 * c.real for _, c in half])
    cim = np.asarray([2.0 * c.imag for _, c in half])
    q = scenery.q_mod
    out = np.zeros((len(x_seeds), weights.shape[1]))
    for lo in range(0, len(x_seeds), chunk):
        seeds = x_seeds[lo:lo + chunk]
        pts = np.stack([_toral_point(scenery, s) for s in seeds])  # (c, rho)
        # phases (M, h, c): sum_j freqs[..., j] * pts[c, j] mod q
        phase = np.zeros((len(sites), len(half), len(seeds)), dtype=np.uint64)
        for j in range(scenery.pair.rho):
            phase += freqs[:, :, j:j + 1] * pts[None, None, :, j]
            phase %= np.uint64(q)
        angle = phase.astype(np.float64) * (2.0 * np.pi / q)
        vals = np.einsum("h,mhc->mc", cre, np.cos(angle))
        vals -= np.einsum("h,mhc->mc", cim, np.sin(angle))
        out[lo:lo + len(seeds)] = vals.T @ weights
    return out


def sample_field_sum(scenery: SceneryModel, path: WalkPath, t_grid, x_seed: int) -> np.ndarray:
    """(S_{floor(n t)})_{t in t_grid} for one scenery draw keyed by x_seed."""
    inc = field_increments(scenery, path, t_grid, [x_seed])
    return np.cumsum(inc[0])


def quenched_variance(scenery: SceneryModel, path: WalkPath, window) -> float:
    """Exact Var_x of S over an index window: sum_p V(omega, J, p) a_p.

    Ties the counting layer to the field correlations; for i.i.d. sceneries
    this is just the self-intersection count of the window.
    """
    from .localtime import pair_count_tables

    density = spectral_density(scenery, dimension=path.model.dimension)
    tab = local_times(path, window)
    total = 0.0
    for p, a in density.fourier.items():
        if not any(p):
            total += a * float(np.dot(tab.counts, tab.counts))
        else:
            total += a * pair_count_tables(tab, tab, p)
    return total


def truncate_field(scenery: SceneryModel, level: float):
    """Split an i.i.d. scenery into its bounded and tail parts at ``level``.

    Both parts are centered and share the site-keyed randomness of the
    original, so they add back to it pathwise.
    """
    if not isinstance(scenery, IIDScenery):
        raise ValueError("truncate_field is defined for i.i.d. sceneries")
    hat = IIDScenery(law=TruncationPart(scenery.law, level, "bounded"))
    tail = IIDScenery(law=TruncationPart(scenery.law, level, "tail"))
    return hat, tail


# ---------------------------------------------------------------------------
# serialization


def scenery_to_dict(scenery: SceneryModel) -> dict:
    if isinstance(scenery, IIDScenery):
        return {"variant": "iid", "law": scenery.law.to_dict()}
    if isinstance(scenery, MovingAverageScenery):
        return {"variant": "moving_average", "law": scenery.law.to_dict(),
                "coeffs": [{"q": list(q), "a": a} for q, a in sorted(scenery.coeffs.items())]}
    if isinstance(scenery, ToralScenery):
        return {"variant": "toral", "pair": algebra.pair_to_dict(scenery.pair),
                "poly": scenery.poly.to_list(), "q_mod": scenery.q_mod,
                "orbit_box": scenery.orbit_box}
    raise TypeError(f"not a scenery model: {scenery!r}")


def scenery_from_dict(doc: dict) -> SceneryModel:
    variant = doc["variant"]
    if variant == "iid":
        return IIDScenery(law=law_from_dict(doc["law"]))
    if variant == "moving_average":
        coeffs = {tuple(item["q"]): item["a"] for item in doc["coeffs"]}
        return MovingAverageScenery(law=law_from_dict(doc["law"]), coeffs=coeffs)
    if variant == "toral":
        from .trigpoly import trig_from_list

        return ToralScenery(pair=algebra.pair_from_dict(doc["pair"]),
                            poly=trig_from_list(doc["poly"]),
                            q_mod=doc["q_mod"],
                            orbit_box=doc.get("orbit_box", 12))
    raise ValueError(f"unknown scenery variant {variant!r}")
