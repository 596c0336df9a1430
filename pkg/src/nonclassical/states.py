"""Constructors for the states used throughout the package.

Classical states (coherent, thermal, the two-mode ansatz) and the Diosi
state are built from their exact P functions, so phase-space quantities
stay free of truncation error; their matrices are truncated with the
smallest dimension whose tail weight is below ``MAX_TAIL``.
"""

from __future__ import annotations

import re

import numpy as np

from .fock import DEFAULT_DIM_SINGLE, DEFAULT_DIM_TWO, MAX_TAIL, FockOperator, TruncationError
from .polygauss import PolyGaussian

__all__ = [
    "coherent",
    "diosi",
    "fock",
    "fock_mix",
    "operator_a",
    "parse_complex",
    "parse_state",
    "sigma_ansatz",
    "sigma_marginal",
    "thermal",
    "vacuum",
    "werner_state",
]


def _auto(terms, modes, dims, max_tail, start, cap):
    if dims is not None:
        dims = tuple(int(d) for d in np.atleast_1d(dims))
        return FockOperator.from_terms(terms, dims, None, max_tail=max_tail)
    d = start
    while True:
        try:
            return FockOperator.from_terms(terms, (d,) * modes, None, max_tail=max_tail)
        except TruncationError:
            if d >= cap:
                raise
            d = min(cap, d + (4 if modes == 1 else 2))


def vacuum(dim: int = DEFAULT_DIM_SINGLE) -> FockOperator:
    return fock(0, dim)


def fock(n: int, dim: int | None = None) -> FockOperator:
    dim = max(DEFAULT_DIM_SINGLE, n + 1) if dim is None else dim
    if not 0 <= n < dim:
        raise ValueError(f"photon number {n} outside truncation {dim}")
    mat = np.zeros((dim, dim))
    mat[n, n] = 1.0
    return FockOperator((dim,), mat)


def fock_mix(weights, dim: int | None = None) -> FockOperator:
    """Fock-diagonal state sum_n w_n |n><n|."""
    weights = np.asarray(weights, dtype=float)
    dim = max(DEFAULT_DIM_SINGLE, len(weights)) if dim is None else dim
    diag = np.zeros(dim)
    diag[: len(weights)] = weights
    return FockOperator((dim,), np.diag(diag))


def coherent(z: complex, dim: int | None = None, max_tail: float = MAX_TAIL) -> FockOperator:
    term = PolyGaussian(1, 0.0, [[0, 0]], [1.0], (0.0,), (complex(z),))
    return _auto((term,), 1, dim, max_tail, DEFAULT_DIM_SINGLE, 400)


def thermal(nbar: float, dim: int | None = None, max_tail: float = MAX_TAIL) -> FockOperator:
    if nbar < 0:
        raise ValueError("mean photon number must be non-negative")
    term = PolyGaussian(1, 0.0, [[0, 0]], [1.0], (float(nbar),))
    return _auto((term,), 1, dim, max_tail, DEFAULT_DIM_SINGLE, 600)


def diosi(dim: int | None = None, max_tail: float = MAX_TAIL) -> FockOperator:
    """P(a) = (2/pi) exp(-|a|^2) - delta(a):  rho_00 = 0, rho_nn = 2^-n."""
    terms = (
        PolyGaussian(1, 0.0, [[0, 0]], [2.0], (1.0,)),
        PolyGaussian(1, 0.0, [[0, 0]], [-1.0], (0.0,)),
    )
    return _auto(terms, 1, dim, max_tail, DEFAULT_DIM_SINGLE, 200)


def operator_a(k: complex = 0.5, dim: int = 3) -> FockOperator:
    """k|0><2| + |1><1| + k*|2><0|: unit trace, Hermitian, not positive."""
    mat = np.zeros((dim, dim), dtype=complex)
    mat[0, 2], mat[1, 1], mat[2, 0] = k, 1.0, np.conj(k)
    return FockOperator((dim,), mat)


def werner_state(p: float, dims=(8, 8)) -> FockOperator:
    """p |phi+><phi+| + (1-p) I/4 on the {0,1} x {0,1} block."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    dims = tuple(dims)
    block = np.zeros((2, 2, 2, 2))
    for i in range(2):
        for j in range(2):
            block[i, j, i, j] += (1 - p) / 4
    for i in range(2):
        for j in range(2):
            block[i, i, j, j] += p / 2
    full = np.zeros(dims + dims)
    full[:2, :2, :2, :2] = block
    n = int(np.prod(dims))
    return FockOperator(dims, full.reshape(n, n))


def sigma_ansatz(tau_sigma: float, dims=None, max_tail: float = MAX_TAIL) -> FockOperator:
    """Classical two-mode state with P = (|zA|^2+|zB|^2)/(2 pi^2 t^3) exp(-(|zA|^2+|zB|^2)/t)."""
    if not tau_sigma > 0:
        raise ValueError("tau_sigma must be positive")
    t = float(tau_sigma)
    term = PolyGaussian.from_dict(2, 0.0, {(1, 1, 0, 0): 0.5 / t, (0, 0, 1, 1): 0.5 / t}, (t, t))
    return _auto((term,), 2, dims, max_tail, DEFAULT_DIM_TWO, 80)


def sigma_marginal(tau_sigma: float, dim: int | None = None, max_tail: float = MAX_TAIL) -> FockOperator:
    """One-mode marginal of :func:`sigma_ansatz`: P = (|z|^2 + t)/(2 pi t^2) exp(-|z|^2/t)."""
    if not tau_sigma > 0:
        raise ValueError("tau_sigma must be positive")
    t = float(tau_sigma)
    term = PolyGaussian.from_dict(1, 0.0, {(1, 1): 0.5 / t, (0, 0): 0.5}, (t,))
    return _auto((term,), 1, dim, max_tail, DEFAULT_DIM_SINGLE, 400)


_COMPLEX = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?([+-](\d+\.?\d*|\.\d+)([eE][+-]?\d+)?i)?$|^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?i$")


def parse_complex(text: str) -> complex:
    """Parse ``re+imi`` (no spaces), e.g. ``1+0i``, ``-0.5-2e-3i``, ``2i``, ``3``."""
    if not _COMPLEX.match(text):
        raise ValueError(f"bad complex number {text!r} (expected re+imi)")
    return complex(text.replace("i", "j"))


def parse_state(spec: str, dims=None) -> FockOperator:
    """Builtin URI (``builtin:werner:0.5``, ``builtin:fock1``) or path to an operator JSON file.

    ``dims`` is an optional tuple of per-mode truncations; a single entry is
    broadcast to two-mode builtins.  Files are zero-padded into ``dims``.
    """
    dims = None if dims is None else tuple(int(d) for d in dims)
    if not spec.startswith("builtin:"):
        from .fock import embed, from_json

        with open(spec) as fh:
            rho = from_json(fh.read())
        return rho if dims is None or dims == rho.dims else embed(rho, dims)
    body = spec[len("builtin:"):]
    name, _, arg = body.partition(":")
    m = re.fullmatch(r"fock(\d+)", name)
    if m:
        name, arg = "fock", m.group(1)
    one = None if dims is None else dims[0]
    two = None if dims is None else (dims * 2 if len(dims) == 1 else dims)
    if name == "vacuum":
        return vacuum(one or DEFAULT_DIM_SINGLE)
    if name == "fock":
        return fock(int(arg), one)
    if name == "coherent":
        return coherent(parse_complex(arg), one)
    if name == "thermal":
        return thermal(float(arg), one)
    if name == "fock-mix":
        return fock_mix([float(w) for w in arg.split(",")], one)
    if name == "diosi":
        return diosi(one)
    if name == "werner":
        return werner_state(float(arg), two or (8, 8))
    if name == "sigma":
        return sigma_ansatz(float(arg), two)
    if name == "operator-A":
        return operator_a(parse_complex(arg) if arg else 0.5, one or 3)
    raise ValueError(f"unknown builtin state {name!r}")
