"""Characteristic functions and regularized P distributions of Fock operators."""

from __future__ import annotations

from math import lgamma

import numpy as np

from .fock import FockOperator, coherent_expectation
from .polygauss import PolyGaussian, PolyGaussianSum, cgauss_moment

__all__ = [
    "char_normal",
    "convolve_further",
    "dump_poly",
    "eval_pg",
    "q_function",
    "regularize",
]

IMAG_TOL = 1e-10
_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _points(beta, modes):
    b = np.asarray(beta, dtype=np.complex128)
    single = b.ndim == 0 or (b.ndim == 1 and (modes > 1 or b.shape[0] == 1) and b.shape[0] == modes)
    if b.ndim == 0:
        b = b.reshape(1, 1)
    elif b.ndim == 1:
        b = b.reshape(1, -1) if single else b.reshape(-1, 1)
    if b.shape[-1] != modes:
        raise ValueError(f"expected {modes} amplitudes per point, got {b.shape[-1]}")
    return b, single


def _support(residual, dims):
    """Per-mode cut-off beyond which the residual vanishes."""
    t = np.abs(residual.reshape(dims + dims)) > 0
    m = len(dims)
    cut = []
    for i in range(m):
        other = tuple(j for j in range(2 * m) if j not in (i, m + i))
        mask = t.any(axis=other) if other else t
        rows = np.flatnonzero(mask.any(axis=1) | mask.any(axis=0))
        cut.append(int(rows.max()) + 1 if rows.size else 0)
    return tuple(cut)


def _crop(residual, dims, cut):
    t = residual.reshape(dims + dims)
    return t[tuple(slice(0, c) for c in cut) * 2]


def _displacement_matrix(beta, d):
    """D[N, n, m] = <n| exp(beta a^dag) exp(-conj(beta) a) |m> for a vector of beta."""
    beta = np.asarray(beta, dtype=np.complex128)
    out = np.zeros((len(beta), d, d), dtype=np.complex128)
    bc = -np.conj(beta)
    for n in range(d):
        for m in range(d):
            for j in range(max(0, n - m), n + 1):
                k = m - n + j
                c = np.exp(0.5 * (lgamma(n + 1) + lgamma(m + 1)) - lgamma(j + 1) - lgamma(k + 1) - lgamma(n - j + 1))
                out[:, n, m] += c * beta**j * bc**k
    return out


def char_normal(rho: FockOperator, beta):
    """Normally ordered characteristic function Tr[rho e^{beta a^dag} e^{-beta^* a}].

    ``beta`` is one coherent point or an array of points (N, modes).
    """
    pts, single = _points(beta, rho.modes)
    val = np.zeros(len(pts), dtype=np.complex128)
    cut = _support(rho.residual, rho.dims)
    if all(cut):
        r = _crop(rho.residual, rho.dims, cut)
        m = rho.modes
        mi, ni = _LETTERS[:m], _LETTERS[m : 2 * m]
        subs = [mi + ni] + [f"Z{ni[i]}{mi[i]}" for i in range(m)]
        mats = [_displacement_matrix(pts[:, i], cut[i]) for i in range(m)]
        val += np.einsum(",".join(subs) + "->Z", r, *mats, optimize=True)
    for term in rho.terms:
        val += _term_char(term, pts)
    return complex(val[0]) if single else val


def _term_char(term: PolyGaussian, pts):
    out = np.zeros(len(pts), dtype=np.complex128)
    for e, c in zip(term.exps, term.coeffs):
        v = np.full(len(pts), c, dtype=np.complex128)
        for i in range(term.modes):
            w, ctr, b = term.width[i], term.center[i], pts[:, i]
            # int (pi w)^-1 e^{-|u|^2/w} u^k conj(u)^l e^{b conj(c+u) - conj(b)(c+u)} d2u
            v *= np.exp(b * np.conj(ctr) - np.conj(b) * ctr - w * np.abs(b) ** 2)
            v *= cgauss_moment(int(e[2 * i]), int(e[2 * i + 1]), w * b, -w * np.conj(b), w)
        out += v
    return out


def _reg_tensor(d, tau):
    # T[m, n, k, l]: weight of z^k conj(z)^l in the regularized image of |m><n|
    t = np.zeros((d, d, d, d))
    ratio = (tau - 1.0) / tau
    with np.errstate(over="ignore", invalid="ignore"):
        _fill_reg(t, d, tau, ratio)
    return t


def _fill_reg(t, d, tau, ratio):
    for m in range(d):
        for n in range(d):
            for j in range(min(m, n) + 1):
                logc = 0.5 * (lgamma(m + 1) + lgamma(n + 1)) - lgamma(j + 1) - lgamma(m - j + 1) - lgamma(n - j + 1)
                logc -= (m + n - 2 * j) * np.log(tau)
                t[m, n, n - j, m - j] = np.exp(logc) * ratio**j


def _fock_part(residual, dims, tau):
    cut = _support(residual, dims)
    m = len(dims)
    if not all(cut):
        return PolyGaussian(m, tau, np.zeros((0, 2 * m), dtype=np.int64), np.zeros(0, dtype=complex))
    r = _crop(residual, dims, cut)
    mi, ni = _LETTERS[:m], _LETTERS[m : 2 * m]
    ks, ls = _LETTERS[2 * m : 3 * m], _LETTERS[3 * m : 4 * m]
    subs = [mi + ni] + [mi[i] + ni[i] + ks[i] + ls[i] for i in range(m)]
    out = "".join(ks[i] + ls[i] for i in range(m))
    coeff = np.einsum(",".join(subs) + "->" + out, r, *[_reg_tensor(c, tau) for c in cut], optimize=True)
    if not np.all(np.isfinite(coeff)):
        raise OverflowError(f"regularization coefficients overflow at tau={tau}")
    idx = np.argwhere(coeff != 0)
    return PolyGaussian(m, tau, idx, coeff[tuple(idx.T)])


def regularize(rho: FockOperator, tau: float):
    """Gaussian-regularized P function of ``rho`` as polynomial x Gaussian.

    Returns a :class:`PolyGaussian` for exactly supported operators and a
    :class:`PolyGaussianSum` when analytic classical pieces are present.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    tau = float(tau)
    fock = _fock_part(rho.residual, rho.dims, tau)
    if not rho.terms:
        return fock
    parts = tuple(t.convolve(tau) for t in rho.terms)
    if len(fock.coeffs):
        parts = (fock,) + parts
    return parts[0] if len(parts) == 1 else PolyGaussianSum(parts)


def eval_pg(pg, z) -> float | np.ndarray:
    """Real value(s) of a regularized distribution at coherent point(s)."""
    pts, single = _points(z, pg.modes)
    v = pg(pts)
    scale = np.maximum(1.0, np.abs(v.real))
    if np.any(np.abs(v.imag) > IMAG_TOL * scale):
        raise ArithmeticError(f"imaginary residue {np.abs(v.imag).max():.3e}")
    return float(v.real[0]) if single else v.real


def convolve_further(pg, extra: float):
    """R_extra applied to an already regularized distribution."""
    if extra <= 0:
        raise ValueError("extra must be positive")
    return pg.convolve(float(extra))


def q_function(rho: FockOperator, z) -> float:
    """Husimi function <z|rho|z>/pi (normalized to integrate to Tr rho)."""
    return coherent_expectation(rho, z) / np.pi


def dump_poly(pg) -> str:
    """Text dump: header ``tau=<v> modes=<m>`` then ``k1 l1 ... re im`` lines."""
    lines = []
    for t in pg.terms:
        head = f"tau={t.tau:.17g} modes={t.modes}"
        if any(abs(w - t.tau) > 0 for w in t.width) or any(t.center):
            head += " width=" + ",".join(f"{w:.17g}" for w in t.width)
            head += " center=" + ",".join(f"{c.real:.17g}{c.imag:+.17g}i" for c in t.center)
        lines.append(head)
        for e, c in zip(t.exps, t.coeffs):
            lines.append(" ".join(str(int(v)) for v in e) + f" {c.real:.17g} {c.imag:.17g}")
    return "\n".join(lines) + "\n"
