"""Lattice random-walk models on Z^d: analytic functions, classification, sampling.

A model is built from a finite increment law.  Derived data: mean and
covariance of one step, aperiodicity of the support lattice L and of the
difference lattice D (exact integer Hermite-form tests), the
recurrent/transient/deterministic classification, and, in the centered
strongly aperiodic planar case, the constant

    C0 = 1 / (pi * sqrt(det Sigma))

that normalizes self-intersection counts and the sums along the walk.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .rng import derive_seed, philox_gen

RECURRENT = "recurrent"
TRANSIENT = "transient"
DETERMINISTIC = "deterministic"

MAX_STEPS = 2**31  # counts fit int64: V_n <= n^2 <= 2^62


class PolePointError(ValueError):
    """Raised when Phi is evaluated at a point where Psi equals 1."""


@dataclass(frozen=True)
class IncrementLaw:
    """Finite increment distribution on Z^d (atom sites with probabilities)."""

    sites: tuple  # tuple of d-tuples of ints
    probs: tuple  # tuple of floats, same length
    dimension: int

    def site_array(self) -> np.ndarray:
        return np.asarray(self.sites, dtype=np.int64).reshape(len(self.sites), self.dimension)

    def prob_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=np.float64)


def increment_law(atoms: Sequence, dimension: Optional[int] = None) -> IncrementLaw:
    """Validate and freeze an atom list ``[(site, prob), ...]``.

    Probabilities must be positive and sum to 1 within 1e-12; sites must be
    pairwise distinct integer vectors of one common dimension.
    """
    if not atoms:
        raise ValueError("increment law needs at least one atom")
    sites = []
    probs = []
    for site, prob in atoms:
        site = tuple(int(c) for c in (site if isinstance(site, (tuple, list, np.ndarray)) else (site,)))
        if dimension is None:
            dimension = len(site)
        if len(site) != dimension:
            raise ValueError(f"atom {site} has dimension {len(site)}, expected {dimension}")
        if not prob > 0:
            raise ValueError(f"atom {site} has non-positive probability {prob}")
        sites.append(site)
        probs.append(float(prob))
    if len(set(sites)) != len(sites):
        raise ValueError("atom sites must be pairwise distinct")
    total = math.fsum(probs)
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    return IncrementLaw(sites=tuple(sites), probs=tuple(probs), dimension=dimension)


def simple_walk_law(d: int) -> IncrementLaw:
    """Uniform law on the 2d unit vectors +-e_i."""
    atoms = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        atoms.append((tuple(e), 1.0 / (2 * d)))
        atoms.append((tuple(-c for c in e), 1.0 / (2 * d)))
    return increment_law(atoms)


def lazy_walk_law_2d() -> IncrementLaw:
    """Uniform law on {0, +-e1, +-e2}; strongly aperiodic, C0 = 5/(2 pi)."""
    atoms = [((0, 0), 0.2), ((1, 0), 0.2), ((-1, 0), 0.2), ((0, 1), 0.2), ((0, -1), 0.2)]
    return increment_law(atoms)


def deterministic_law(site) -> IncrementLaw:
    return increment_law([(tuple(site), 1.0)])


def hermite_lattice_index(generators: Sequence, d: int) -> int:
    """Index [Z^d : L] of the lattice spanned by integer ``generators``.

    Exact integer column reduction (Hermite normal form); returns 0 when
    the generators do not span rank d, i.e. the index is infinite.
    """
    cols = [[int(c) for c in g] for g in generators]
    cols = [c for c in cols if any(c)]
    index = 1
    for row in range(d):
        live = [c for c in cols if c[row] != 0]
        if not live:
            return 0
        # Euclid across columns until a single nonzero entry survives in this row
        while len(live) > 1:
            live.sort(key=lambda c: abs(c[row]))
            pivot = live[0]
            for c in live[1:]:
                q = c[row] // pivot[row]
                for i in range(d):
                    c[i] -= q * pivot[i]
            live = [c for c in live if c[row] != 0]
        pivot = live[0]
        index *= abs(pivot[row])
        cols = [c for c in cols if c is not pivot and any(c[row:])]
    return index


@dataclass(frozen=True)
class WalkModel:
    """Increment law plus everything derived from it."""

    law: IncrementLaw
    mean: np.ndarray
    sigma: np.ndarray  # covariance of one increment
    aperiodic: bool
    strongly_aperiodic: bool
    classification: str
    c0: Optional[float]

    @property
    def dimension(self) -> int:
        return self.law.dimension

    @property
    def centered(self) -> bool:
        return bool(np.all(np.abs(self.mean) <= 1e-12))

    @property
    def effectively_transient(self) -> bool:
        """True when the walk escapes to infinity (so Green-type series converge).

        Deterministic walks with a nonzero step drift away and qualify; the
        single-atom law at 0 behaves recurrently and does not.
        """
        if self.classification == TRANSIENT:
            return True
        if self.classification == DETERMINISTIC:
            return any(c != 0 for c in self.law.sites[0])
        return False


def build_walk_model(law: IncrementLaw) -> WalkModel:
    sites = law.site_array()
    probs = law.prob_array()
    d = law.dimension
    mean = probs @ sites.astype(np.float64)
    centered_sites = sites.astype(np.float64) - mean
    sigma = (centered_sites * probs[:, None]).T @ centered_sites

    aperiodic = hermite_lattice_index(law.sites, d) == 1
    diffs = []
    for i in range(len(law.sites)):
        for j in range(len(law.sites)):
            if i != j:
                diffs.append(tuple(a - b for a, b in zip(law.sites[i], law.sites[j])))
    strongly_aperiodic = hermite_lattice_index(diffs, d) == 1 if diffs else False

    centered = bool(np.all(np.abs(mean) <= 1e-12))
    if len(law.sites) == 1:
        classification = DETERMINISTIC
    elif d <= 2:
        classification = RECURRENT if centered else TRANSIENT
    else:
        classification = TRANSIENT

    c0 = None
    if d == 2 and centered and strongly_aperiodic:
        det = float(np.linalg.det(sigma))
        c0 = 1.0 / (math.pi * math.sqrt(det))

    return WalkModel(
        law=law,
        mean=mean,
        sigma=sigma,
        aperiodic=aperiodic,
        strongly_aperiodic=strongly_aperiodic,
        classification=classification,
        c0=c0,
    )


def characteristic_fn(model: WalkModel, t) -> complex:
    """Psi(t) = sum_l nu(l) exp(2 pi i <l, t>), t a point of the d-torus.

    Vectorizes over a trailing batch of points: ``t`` of shape (..., d)
    returns an array of shape (...).
    """
    t = np.asarray(t, dtype=np.float64)
    scalar = t.ndim == 1
    phases = t @ model.law.site_array().astype(np.float64).T
    psi = np.exp(2j * np.pi * phases) @ model.law.prob_array().astype(np.complex128)
    return complex(psi) if scalar else psi


def phi_ratio(model: WalkModel, t) -> float:
    """Phi(t) = (1 - |Psi|^2) / |1 - Psi|^2, nonnegative, zero iff |Psi| = 1.

    |Psi|^2 carries float roundoff of order 1e-16, so numerators below 1e-13
    snap to exactly zero (the deterministic walk has |Psi| identically 1 and
    must report 0, not dust).
    """
    psi = characteristic_fn(model, np.asarray(t, dtype=np.float64))
    denom = abs(1.0 - psi) ** 2
    if denom < 1e-28:
        raise PolePointError(f"Psi(t) = 1 at t = {t}; Phi has a pole there")
    num = 1.0 - abs(psi) ** 2
    if num < 1e-13:
        return 0.0
    return num / denom


@dataclass(frozen=True)
class WalkPath:
    """One realization: positions Z_0 .. Z_{n-1} plus the seed regenerating it."""

    model: WalkModel
    n: int
    positions: np.ndarray  # (n, d) int64
    seed: int

    def window_positions(self, start: int, stop: int) -> np.ndarray:
        if not (0 <= start <= stop <= self.n):
            raise IndexError(f"window [{start}, {stop}) out of range [0, {self.n})")
        return self.positions[start:stop]


def sample_path(model: WalkModel, n: int, seed: int) -> WalkPath:
    """Draw n positions starting at 0, increments by inverse CDF over the atoms.

    The generator is counter-based and keyed by ``seed``; rebuilding from
    (model, n, seed) reproduces the positions bit-exactly.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if n > MAX_STEPS:
        raise ValueError(f"n = {n} exceeds the supported maximum {MAX_STEPS}")
    d = model.dimension
    positions = np.zeros((n, d), dtype=np.int64)
    if n > 1:
        gen = philox_gen(derive_seed(seed, "walk-increments"))
        u = gen.random(n - 1)
        cdf = np.cumsum(model.law.prob_array())
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, u, side="right")
        increments = model.law.site_array()[idx]
        np.cumsum(increments, axis=0, out=positions[1:])
    return WalkPath(model=model, n=n, positions=positions, seed=seed)


@dataclass(frozen=True)
class GreenSeries:
    """Truncated Green-type series I(l) = 1_{l=0} + sum_k [P(Z_k=l) + P(Z_k=-l)]."""

    value: float          # truncated at k_max (indicator included)
    k_max: int
    tail_estimate: float  # local-limit-theorem estimate of the mass beyond k_max
    stderr: float         # Monte Carlo standard error; 0.0 for exact convolution
    method: str           # "convolution" | "monte_carlo"


def _convolution_budget(model: WalkModel, k_max: int) -> float:
    max_coord = int(np.max(np.abs(model.law.site_array()), initial=0))
    edge = 2 * k_max * max(max_coord, 1) + 1
    return float(edge) ** model.dimension * k_max * len(model.law.sites)


def _tail_estimate(model: WalkModel, k_max: int) -> float:
    """LLT tail for centered walks: sum_{k>k_max} 2 P(Z_k = l) with the
    Gaussian factor dropped (the l-dependence is negligible at this depth).

    Non-centered transient walks have exponentially small tails at fixed l;
    report 0 for them.
    """
    if not model.centered:
        return 0.0
    d = model.dimension
    if d <= 2:
        raise ValueError("centered walks in d <= 2 are recurrent; the series diverges")
    det = float(np.linalg.det(model.sigma))
    coef = 2.0 * (2.0 * math.pi) ** (-d / 2.0) / math.sqrt(det)
    return coef * (2.0 / (d - 2)) * (k_max + 0.5) ** (1 - d / 2.0)


def green_series(
    model: WalkModel,
    site,
    k_max: int = 60,
    m_paths: int = 20000,
    seed: int = 0,
    budget: float = 2e9,
) -> GreenSeries:
    """Estimate of I(site), exactly by k-fold convolution when affordable.

    Rejects recurrent models (the series diverges).  Falls back to Monte
    Carlo with a reported standard error when the support box is too large
    for exact convolution.
    """
    if not model.effectively_transient:
        raise ValueError("green_series requires a transient walk; the series diverges otherwise")
    site = tuple(int(c) for c in site)
    d = model.dimension
    if len(site) != d:
        raise ValueError(f"site {site} has wrong dimension, expected {d}")

    if _convolution_budget(model, k_max) <= budget:
        value = _green_convolution(model, site, k_max)
        return GreenSeries(value=value, k_max=k_max, tail_estimate=_tail_estimate(model, k_max),
                           stderr=0.0, method="convolution")
    value, stderr = _green_monte_carlo(model, site, k_max, m_paths, seed)
    return GreenSeries(value=value, k_max=k_max, tail_estimate=_tail_estimate(model, k_max),
                       stderr=stderr, method="monte_carlo")


def green_series_table(model: WalkModel, sites, k_max: int = 60,
                       budget: float = 2e9) -> dict:
    """Truncated I(site) for several sites in one exact convolution pass.

    Used where a correlation table weights the series; all sites share the
    walk distribution, so the k-fold convolution is done once.
    """
    if not model.effectively_transient:
        raise ValueError("green series requires a transient walk")
    sites = [tuple(int(c) for c in s) for s in sites]
    if _convolution_budget(model, k_max) > budget:
        return {s: green_series(model, s, k_max=k_max) for s in sites}
    values = _green_convolution_multi(model, sites, k_max)
    tail = _tail_estimate(model, k_max)
    return {s: GreenSeries(value=v, k_max=k_max, tail_estimate=tail,
                           stderr=0.0, method="convolution")
            for s, v in values.items()}


def _green_convolution(model: WalkModel, site, k_max: int) -> float:
    return _green_convolution_multi(model, [tuple(int(c) for c in site)], k_max)[
        tuple(int(c) for c in site)]


def _green_convolution_multi(model: WalkModel, sites, k_max: int) -> dict:
    d = model.dimension
    atoms = model.law.site_array()
    probs = model.law.prob_array()
    max_coord = int(np.max(np.abs(atoms), initial=0))
    r = k_max * max(max_coord, 1)
    dist = np.zeros((2 * r + 1,) * d, dtype=np.float64)
    dist[(r,) * d] = 1.0

    def entry(arr, point):
        idx = tuple(r + c for c in point)
        if any(not (0 <= i < 2 * r + 1) for i in idx):
            return 0.0
        return float(arr[idx])

    totals = {s: (1.0 if not any(s) else 0.0) for s in sites}
    for _ in range(k_max):
        new = np.zeros_like(dist)
        for atom, p in zip(atoms, probs):
            src = [slice(None)] * d
            dst = [slice(None)] * d
            for ax, shift in enumerate(atom):
                shift = int(shift)
                if shift >= 0:
                    dst[ax] = slice(shift, None) if shift else slice(None)
                    src[ax] = slice(None, -shift) if shift else slice(None)
                else:
                    dst[ax] = slice(None, shift)
                    src[ax] = slice(-shift, None)
            new[tuple(dst)] += p * dist[tuple(src)]
        dist = new
        for s in sites:
            totals[s] += entry(dist, s) + entry(dist, tuple(-c for c in s))
    return totals


def _green_monte_carlo(model: WalkModel, site, k_max: int, m_paths: int, seed: int):
    target = np.asarray(site, dtype=np.int64)
    counts = np.zeros(m_paths, dtype=np.int64)
    batch = max(1, int(2e7 // max(k_max, 1)))
    done = 0
    while done < m_paths:
        b = min(batch, m_paths - done)
        gen = philox_gen(derive_seed(seed, "green-mc", done))
        u = gen.random((b, k_max))
        cdf = np.cumsum(model.law.prob_array())
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, u, side="right")
        steps = model.law.site_array()[idx]  # (b, k_max, d)
        pos = np.cumsum(steps, axis=1)
        hits = np.all(pos == target, axis=2) | np.all(pos == -target, axis=2)
        if np.all(target == 0):
            hits = np.all(pos == 0, axis=2)
            counts[done:done + b] = 2 * hits.sum(axis=1)
        else:
            counts[done:done + b] = hits.sum(axis=1)
        done += b
    base = 1.0 if np.all(target == 0) else 0.0
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(m_paths)) if m_paths > 1 else 0.0
    return base + mean, stderr


def model_to_dict(model: WalkModel) -> dict:
    return {
        "dimension": model.dimension,
        "atoms": [{"site": list(s), "prob": p} for s, p in zip(model.law.sites, model.law.probs)],
        "mean": [float(x) for x in model.mean],
        "sigma": [[float(x) for x in row] for row in model.sigma],
        "aperiodic": model.aperiodic,
        "strongly_aperiodic": model.strongly_aperiodic,
        "classification": model.classification,
        "c0": model.c0,
    }


def model_from_dict(doc: dict) -> WalkModel:
    law = increment_law([(tuple(a["site"]), a["prob"]) for a in doc["atoms"]],
                        dimension=doc.get("dimension"))
    return build_walk_model(law)


def model_to_json(model: WalkModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_from_json(text: str) -> WalkModel:
    return model_from_dict(json.loads(text))
