"""Polynomial-times-Gaussian phase-space distributions.

A :class:`PolyGaussian` stores

    f(z) = prod_i (pi w_i)^-1 exp(-|z_i - c_i|^2 / w_i) * sum_e c_e prod_i u_i^k_i conj(u_i)^l_i

with ``u_i = z_i - c_i``.  For regularized P functions of Fock-truncated
operators the envelope width equals the regularization parameter and the
centre is zero; classical analytic pieces (thermal, coherent, ...) carry
their own widths.  Widths of zero encode delta functions and are only
allowed for constant polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from . import kernels

__all__ = ["PolyGaussian", "PolyGaussianSum", "cgauss_moment"]


def cgauss_moment(k: int, l: int, mean, mean_bar, var):
    """E[a^k conj(a)^l] for a complex Gaussian with E[a]=mean, E[conj a]=mean_bar.

    ``mean_bar`` is passed separately so the formula also covers imaginary
    tilts, where it is not the conjugate of ``mean``.  Vectorizes over numpy
    inputs.
    """
    total = 0.0
    for j in range(min(k, l) + 1):
        total = total + comb(k, j) * comb(l, j) * factorial(j) * var**j * mean ** (k - j) * mean_bar ** (l - j)
    return total


def _normalize(exps, coeffs):
    exps = np.asarray(exps, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if exps.size == 0:
        return exps.reshape(0, exps.shape[-1] if exps.ndim == 2 else 0), coeffs.reshape(0)
    order = np.lexsort(exps.T[::-1])
    exps, coeffs = exps[order], coeffs[order]
    uniq, start = np.unique(exps, axis=0, return_index=True)
    sums = np.add.reduceat(coeffs, start)
    keep = sums != 0
    return uniq[keep], sums[keep]


@dataclass(frozen=True, eq=False)
class PolyGaussian:
    modes: int
    tau: float
    exps: np.ndarray
    coeffs: np.ndarray
    width: tuple = None
    center: tuple = None

    def __post_init__(self):
        m = self.modes
        if m < 1:
            raise ValueError("modes must be positive")
        exps, coeffs = np.asarray(self.exps, dtype=np.int64), np.asarray(self.coeffs, dtype=np.complex128)
        if exps.size == 0:
            exps = exps.reshape(0, 2 * m)
        if exps.ndim != 2 or exps.shape[1] != 2 * m or len(coeffs) != len(exps):
            raise ValueError("exponent array must have shape (terms, 2*modes)")
        if (exps < 0).any():
            raise ValueError("negative exponent")
        exps, coeffs = _normalize(exps, coeffs)
        width = tuple(float(w) for w in (self.width if self.width is not None else (self.tau,) * m))
        center = tuple(complex(c) for c in (self.center if self.center is not None else (0j,) * m))
        if len(width) != m or len(center) != m:
            raise ValueError("width/center length must equal mode count")
        if any(w < 0 for w in width):
            raise ValueError("negative envelope width")
        if any(w == 0 for w in width) and (exps.any() if exps.size else False):
            raise ValueError("zero-width (delta) terms must have a constant polynomial")
        exps.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "exps", exps)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "center", center)

    @classmethod
    def from_dict(cls, modes, tau, mapping, width=None, center=None):
        keys = list(mapping)
        exps = np.array(keys, dtype=np.int64).reshape(len(keys), 2 * modes)
        return cls(modes, tau, exps, np.array([mapping[k] for k in keys], dtype=complex), width, center)

    @property
    def coeff_map(self) -> dict:
        """Exponent tuple -> coefficient, in lexicographic order."""
        return {tuple(int(v) for v in e): complex(c) for e, c in zip(self.exps, self.coeffs)}

    @property
    def terms(self):
        return (self,)

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if len(self.exps) else 0

    @property
    def is_delta(self) -> bool:
        return any(w == 0 for w in self.width)

    def is_hermitian_symmetric(self, tol=1e-12) -> bool:
        cmap = self.coeff_map
        scale = max((abs(c) for c in cmap.values()), default=1.0)
        for e, c in cmap.items():
            swapped = tuple(v for i in range(self.modes) for v in (e[2 * i + 1], e[2 * i]))
            if abs(cmap.get(swapped, 0) - np.conj(c)) > tol * max(scale, 1.0):
                return False
        return True

    def scaled(self, factor) -> PolyGaussian:
        return PolyGaussian(self.modes, self.tau, self.exps, self.coeffs * factor, self.width, self.center)

    def integral(self) -> complex:
        """Integral over phase space from the Gaussian moments."""
        total = 0j
        for e, c in zip(self.exps, self.coeffs):
            ks, ls = e[0::2], e[1::2]
            if (ks != ls).any():
                continue
            total += c * np.prod([factorial(int(k)) * w ** int(k) for k, w in zip(ks, self.width)])
        return total

    def convolve(self, extra: float) -> PolyGaussian:
        """Convolve with the normalized Gaussian of variance ``extra`` per mode."""
        if extra <= 0:
            raise ValueError("extra regularization must be positive")
        m = self.modes
        ratio = [w / (w + extra) for w in self.width]
        var = [w * extra / (w + extra) for w in self.width]
        out: dict = {}
        for e, c in zip(self.exps, self.coeffs):
            parts = [((), c)]
            for i in range(m):
                k, l = int(e[2 * i]), int(e[2 * i + 1])
                nxt = []
                for j in range(min(k, l) + 1):
                    f = comb(k, j) * comb(l, j) * factorial(j) * var[i] ** j * ratio[i] ** (k + l - 2 * j)
                    if f == 0:
                        continue
                    nxt.extend((pre + (k - j, l - j), v * f) for pre, v in parts)
                parts = nxt
            for key, v in parts:
                out[key] = out.get(key, 0) + v
        return PolyGaussian.from_dict(m, self.tau + extra, out, tuple(w + extra for w in self.width), self.center)

    def dilate(self, a: float) -> PolyGaussian:
        """Image under P(z) -> P(z/a)/a^2 per mode."""
        if a <= 0:
            raise ValueError("a must be positive")
        powers = self.exps.sum(axis=1)
        return PolyGaussian(
            self.modes,
            a * a * self.tau,
            self.exps,
            self.coeffs * float(a) ** (-powers.astype(float)),
            tuple(a * a * w for w in self.width),
            tuple(a * c for c in self.center),
        )

    def conjugate_mode(self, mode: int) -> PolyGaussian:
        """P(.., z_mode, ..) -> P(.., conj z_mode, ..): partial transpose of a P function."""
        exps = self.exps.copy()
        exps[:, [2 * mode, 2 * mode + 1]] = exps[:, [2 * mode + 1, 2 * mode]]
        center = list(self.center)
        center[mode] = np.conj(center[mode])
        return PolyGaussian(self.modes, self.tau, exps, self.coeffs, self.width, tuple(center))

    def __call__(self, z):
        return as_sum(self)(z)

    def sign_function(self, z):
        return as_sum(self).sign_function(z)

    def poly(self, z):
        z = _points(z, self.modes)
        return kernels.poly_eval(self.exps, self.coeffs, z - np.asarray(self.center))

    def __add__(self, other):
        return PolyGaussianSum(self.terms + other.terms)


def _points(z, modes):
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim == 0:
        z = z.reshape(1, 1)
    elif z.ndim == 1:
        z = z.reshape(1, -1) if modes > 1 or z.shape[0] == 1 else z.reshape(-1, 1)
    if z.shape[-1] != modes:
        raise ValueError(f"expected {modes} amplitudes per point, got {z.shape[-1]}")
    return z


@dataclass(frozen=True, eq=False)
class PolyGaussianSum:
    """Sum of :class:`PolyGaussian` pieces with possibly different envelopes."""

    terms: tuple
    _packed: object = field(default=None, repr=False)

    def __post_init__(self):
        terms = tuple(t for t in self.terms if len(t.coeffs))
        if not self.terms:
            raise ValueError("empty sum")
        if len({t.modes for t in self.terms}) != 1:
            raise ValueError("mode mismatch between terms")
        if any(t.is_delta for t in terms):
            raise ValueError("delta terms cannot be evaluated pointwise")
        object.__setattr__(self, "terms", terms if terms else self.terms[:1])
        object.__setattr__(self, "_packed", kernels.pack(self.terms))

    @property
    def modes(self) -> int:
        return self.terms[0].modes

    @property
    def tau(self) -> float:
        return self.terms[0].tau

    @property
    def degree(self) -> int:
        return max(t.degree for t in self.terms)

    def __call__(self, z):
        z = _points(z, self.modes)
        v = kernels.packed_eval(self._packed, z, normalized=False)
        return v

    def sign_function(self, z):
        """Same sign as the distribution, but bounded and free of Gaussian underflow."""
        z = _points(z, self.modes)
        return kernels.packed_eval(self._packed, z, normalized=True)

    def integral(self) -> complex:
        return sum(t.integral() for t in self.terms)

    def convolve(self, extra):
        return PolyGaussianSum(tuple(t.convolve(extra) for t in self.terms))

    def dilate(self, a):
        return PolyGaussianSum(tuple(t.dilate(a) for t in self.terms))

    def scaled(self, factor):
        return PolyGaussianSum(tuple(t.scaled(factor) for t in self.terms))

    def is_hermitian_symmetric(self, tol=1e-12) -> bool:
        return all(t.is_hermitian_symmetric(tol) for t in self.terms)

    def __add__(self, other):
        return PolyGaussianSum(self.terms + other.terms)


def as_sum(pg) -> PolyGaussianSum:
    if isinstance(pg, PolyGaussianSum):
        return pg
    cached = pg.__dict__.get("_as_sum")
    if cached is None:
        cached = PolyGaussianSum(pg.terms)
        object.__setattr__(pg, "_as_sum", cached)
    return cached
