"""Phase-space dilation maps, their duals, detection and witnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from math import comb

import numpy as np

from .depth import CLASSICAL, MinSearchConfig, depth, global_min
from .fock import FockOperator, _pad, _term_pairing, coherent_expectation, coherent_vector
from .quasiprob import _crop, _support, char_normal, regularize

__all__ = [
    "DetectionReport",
    "WitnessSpec",
    "char_scaled",
    "detect",
    "dual_lambda",
    "lambda_map",
    "witness",
    "witness_expectation",
]

RELIABLE_TAIL = 1e-6


def _kraus_like(a, d):
    """L[k] with L[k][m-k, m] = sqrt(C(m,k)) a^(m-k), and weights (1-a^2)^k."""
    ops = np.zeros((d, d, d))
    for k in range(d):
        for m in range(k, d):
            ops[k, m - k, m] = math.sqrt(comb(m, k)) * a ** (m - k)
    weights = (1.0 - a * a) ** np.arange(d)
    return ops, weights


def _apply_modewise(matrix, dims, a, dual=False):
    m = len(dims)
    t = matrix.reshape(dims + dims)
    for i in range(m):
        ops, weights = _kraus_like(a, dims[i])
        acc = np.zeros_like(t)
        for k in range(dims[i]):
            op = ops[k].T if dual else ops[k]
            u = np.moveaxis(np.tensordot(op, t, axes=(1, i)), 0, i)
            u = np.moveaxis(np.tensordot(op, u, axes=(1, m + i)), 0, m + i)
            acc += weights[k] * u
        t = acc
    n = int(np.prod(dims))
    return t.reshape(n, n)


def lambda_map(rho: FockOperator, a: float) -> FockOperator:
    """P(z) -> P(z/a)/a^2 on every mode; attenuation for a <= 1.

    The number-basis action only lowers photon numbers, so it is exact on
    exactly supported operators.  Analytic pieces are dilated directly.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    a = float(a)
    cut = _support(rho.residual, rho.dims)
    if all(cut):
        small = _crop(rho.residual, rho.dims, cut).reshape((int(np.prod(cut)),) * 2)
        residual = _pad(_apply_modewise(small, cut, a), cut, rho.dims)
    else:
        residual = np.zeros_like(rho.residual)
    if not rho.terms:
        return FockOperator(rho.dims, residual, rho.hermitian)
    terms = tuple(t.dilate(a) for t in rho.terms)
    return FockOperator.from_terms(terms, rho.dims, residual, rho.hermitian, max_tail=None)


def dual_lambda(x: FockOperator, a: float) -> FockOperator:
    """Trace-dual of :func:`lambda_map` on the truncated space."""
    if not a > 0:
        raise ValueError("a must be positive")
    out = _apply_modewise(x.matrix, x.dims, float(a), dual=True)
    if x.hermitian:
        out = 0.5 * (out + out.conj().T)
    return FockOperator(x.dims, out, x.hermitian)


def char_scaled(rho: FockOperator, a: float, beta):
    """chi_a(beta) = chi(a beta)."""
    if not a > 0:
        raise ValueError("a must be positive")
    return char_normal(rho, a * np.asarray(beta, dtype=np.complex128))


@dataclass(frozen=True)
class WitnessSpec:
    a: float
    beta: tuple
    dims: tuple

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        beta = tuple(complex(b) for b in np.atleast_1d(self.beta))
        dims = tuple(int(d) for d in np.atleast_1d(self.dims))
        if len(beta) != len(dims):
            raise ValueError("beta and dims must have one entry per mode")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "dims", dims)


def _projector(beta, dims):
    v = reduce(np.kron, [coherent_vector(b, d) for b, d in zip(beta, dims)])
    return np.outer(v, v.conj())


def witness(spec: WitnessSpec) -> FockOperator:
    """W = dual map applied to |beta><beta|, materialized in ``spec.dims``."""
    proj = FockOperator(spec.dims, _projector(spec.beta, spec.dims))
    return dual_lambda(proj, spec.a)


def witness_expectation(rho: FockOperator, spec: WitnessSpec) -> float:
    """Tr[rho W] without truncating W on analytic pieces.

    The residual part is paired with the materialized witness; analytic
    pieces use the exact symbol <alpha|W|alpha> = |<beta|a alpha>|^2.
    """
    if len(spec.beta) != rho.modes:
        raise ValueError("mode mismatch")
    val = 0j
    cut = _support(rho.residual, rho.dims)
    if all(cut):
        # W restricted to the residual's support only involves that block
        cut = tuple(max(c, 2) for c in cut)
        r = _crop(rho.residual, rho.dims, cut).reshape((int(np.prod(cut)),) * 2)
        w = witness(WitnessSpec(spec.a, spec.beta, cut))
        val += np.trace(r @ w.matrix)
    for t in rho.terms:
        val += _term_pairing(t, spec.beta, spec.a)
    return float(val.real)


@dataclass(frozen=True)
class DetectionReport:
    found: bool
    a_used: float | None
    beta_used: tuple | None
    expectation: float | None
    a_bound: float | None
    tau_m: float | None
    reliable: bool = True

    def to_dict(self) -> dict:
        beta = None if self.beta_used is None else [[b.real, b.imag] for b in self.beta_used]
        return {
            "found": self.found,
            "a": self.a_used,
            "beta": beta,
            "expectation": self.expectation,
            "a_bound": self.a_bound,
            "tau_m": self.tau_m,
            "reliable": self.reliable,
        }


def a_grid(start: float, ratio: float = 1.15, cap: float = 2.0) -> list:
    """Geometric grid from ``start`` to ``cap`` (both included)."""
    grid, a = [], start
    while a < cap * (1 - 1e-9):
        grid.append(a)
        a *= ratio
    grid.append(max(cap, start))
    return grid


def detect(rho: FockOperator, cfg: MinSearchConfig | None = None, use_depth: bool = True,
           a_values=None, tau_max: float = 4.0, a_max: float = 2.0) -> DetectionReport:
    """Search a and beta with <beta|Lambda_a[rho]|beta> < 0.

    The a-grid starts just above the depth bound 1/sqrt(tau_m) and runs to
    ``a_max``; the most negative expectation found is reported.
    """
    cfg = cfg or MinSearchConfig()
    tau_m = a_bound = None
    if a_values is not None:
        grid = list(a_values)
    elif use_depth:
        res = depth(rho, tau_max, cfg)
        tau_m = res.tau_m
        if res.status == CLASSICAL:
            return DetectionReport(False, None, None, None, None, 0.0)
        a_bound = 1.0 / math.sqrt(tau_m)
        grid = a_grid(1.02 / math.sqrt(res.bracket[0]), cap=a_max)
    else:
        grid = a_grid(1.1, cap=a_max)
    # expectations and distributions use analytic pieces exactly; only the
    # input's own truncation can bias the result
    reliable = rho.tail <= RELIABLE_TAIL
    best = None
    for a in grid:
        mapped = lambda_map(rho, a)
        q = regularize(mapped, 1.0)
        if not any(len(t.coeffs) for t in q.terms):
            continue
        cands = [global_min(q, cfg, normalized=True)[1], global_min(q, cfg)[1]]
        exps = [coherent_expectation(mapped, b) for b in cands]
        i = int(np.argmin(exps))
        if exps[i] < -1e-12 and (best is None or exps[i] < best[2]):
            best = (a, tuple(complex(b) for b in cands[i]), exps[i])
    if best is None:
        return DetectionReport(False, None, None, None, a_bound, tau_m, reliable)
    return DetectionReport(True, *best, a_bound, tau_m, reliable)
