"""Real trigonometric polynomials on the rho-torus, indexed by frequency vectors.

The zero frequency is excluded (observables are centered) and coefficients
satisfy c_{-k} = conj(c_k) so values are real.  Evaluation is supported both
at float points and at rational lattice points p/q via exact integer phases,
which is what keeps iteration under hyperbolic matrices stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TrigPolynomial:
    """coeffs: mapping frequency tuple (in Z^rho, nonzero) -> complex coefficient."""

    coeffs: dict
    rho: int = field(init=False, default=0)

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("empty trigonometric polynomial")
        rho = len(next(iter(self.coeffs)))
        object.__setattr__(self, "rho", rho)
        norm = {}
        for k, c in self.coeffs.items():
            k = tuple(int(x) for x in k)
            if len(k) != rho:
                raise ValueError("inconsistent frequency dimensions")
            if all(x == 0 for x in k):
                raise ValueError("zero frequency not allowed (observables are centered)")
            norm[k] = complex(c)
        for k, c in norm.items():
            mk = tuple(-x for x in k)
            if mk not in norm or abs(norm[mk] - c.conjugate()) > 1e-12:
                raise ValueError(f"coefficients not Hermitian at {k}: real-valuedness fails")
        object.__setattr__(self, "coeffs", norm)

    @property
    def support(self) -> list:
        return sorted(self.coeffs)

    def support_array(self) -> np.ndarray:
        return np.asarray(self.support, dtype=np.int64)

    def coeff_array(self) -> np.ndarray:
        return np.asarray([self.coeffs[k] for k in self.support], dtype=np.complex128)

    def norm_c(self) -> float:
        """||f||_c = sum |c_k| (absolutely convergent by finiteness)."""
        return float(sum(abs(c) for c in self.coeffs.values()))

    def norm_l2_sq(self) -> float:
        """||f||_2^2 = sum |c_k|^2 (Parseval)."""
        return float(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def fourth_moment(self) -> float:
        """E f^4 over Haar measure: zero-sum quadruples of frequencies."""
        ks = self.support
        cs = self.coeff_array()
        total = 0.0 + 0.0j
        sums2 = {}
        for i, ki in enumerate(ks):
            for j, kj in enumerate(ks):
                s = tuple(a + b for a, b in zip(ki, kj))
                sums2[s] = sums2.get(s, 0.0 + 0.0j) + cs[i] * cs[j]
        for s, v in sums2.items():
            ms = tuple(-x for x in s)
            if ms in sums2:
                total += v * sums2[ms]
        return float(total.real)

    def evaluate(self, x) -> float:
        """f(x) at a float point of the torus."""
        x = np.asarray(x, dtype=np.float64)
        phases = self.support_array() @ x
        return float(np.real(np.sum(self.coeff_array() * np.exp(2j * np.pi * phases))))

    def evaluate_lattice(self, p: np.ndarray, q: int) -> np.ndarray:
        """f(p/q) at integer points, phases reduced mod q exactly.

        ``p`` has shape (..., rho) with entries in [0, q); uint64 arithmetic
        is exact because q < 2^31.
        """
        p = np.asarray(p, dtype=np.uint64)
        ks = self.support_array()
        cs = self.coeff_array()
        qq = np.uint64(q)
        kmod = np.mod(ks, q).astype(np.uint64)
        phase = np.zeros(p.shape[:-1] + (len(ks),), dtype=np.uint64)
        for j in range(self.rho):
            phase = (phase + kmod[:, j] * p[..., j:j + 1]) % qq
        angles = phase.astype(np.float64) * (2.0 * np.pi / q)
        vals = np.cos(angles) @ cs.real - np.sin(angles) @ cs.imag
        return vals

    def truncate_to(self, n_terms: int) -> "TrigPolynomial":
        """Keep the n_terms largest coefficients (conjugate pairs kept together)."""
        pairs = []
        seen = set()
        for k in self.support:
            mk = tuple(-x for x in k)
            if k in seen or mk in seen:
                continue
            seen.add(k)
            pairs.append((abs(self.coeffs[k]), k, mk))
        pairs.sort(reverse=True)
        kept = {}
        for _, k, mk in pairs:
            if len(kept) >= n_terms:
                break
            kept[k] = self.coeffs[k]
            kept[mk] = self.coeffs[mk]
        return TrigPolynomial(kept)

    def to_list(self) -> list:
        return [[list(k), c.real, c.imag] for k, c in sorted(self.coeffs.items())]


def trig_from_list(items) -> TrigPolynomial:
    return TrigPolynomial({tuple(k): complex(re, im) for k, re, im in items})


def cosine_polynomial(freqs, amplitudes=None, rho=None) -> TrigPolynomial:
    """sum_j a_j cos(2 pi <k_j, x>) as coefficient pairs c_{+-k} = a/2."""
    coeffs = {}
    for j, k in enumerate(freqs):
        a = 1.0 if amplitudes is None else float(amplitudes[j])
        k = tuple(int(x) for x in k)
        mk = tuple(-x for x in k)
        coeffs[k] = coeffs.get(k, 0.0) + a / 2.0
        coeffs[mk] = coeffs.get(mk, 0.0) + a / 2.0
    return TrigPolynomial(coeffs)
