"""Pure-numpy implementations of the phase-space evaluation kernels."""

import numpy as np


def _monomials(exps, u):
    # u: (N, m) shifted points -> (N, C) monomial values
    n, m = u.shape
    out = np.ones((n, len(exps)), dtype=np.complex128)
    for i in range(m):
        kmax = int(exps[:, 2 * i].max(initial=0))
        lmax = int(exps[:, 2 * i + 1].max(initial=0))
        top = max(kmax, lmax)
        pw = u[:, i, None] ** np.arange(top + 1)
        out *= pw[:, exps[:, 2 * i]] * np.conj(pw)[:, exps[:, 2 * i + 1]]
    return out


def poly_eval(exps, coeffs, u):
    if len(coeffs) == 0:
        return np.zeros(len(u), dtype=np.complex128)
    return _monomials(exps, u) @ coeffs


def packed_eval(exps, coeffs, owner, widths, centers, logpref, degree, z, normalized):
    n_terms = len(logpref)
    logs = np.empty((len(z), n_terms))
    polys = np.empty((len(z), n_terms), dtype=np.complex128)
    for t in range(n_terms):
        u = z - centers[t]
        logs[:, t] = logpref[t] - (np.abs(u) ** 2 / widths[t]).sum(axis=1)
        sel = owner == t
        polys[:, t] = poly_eval(exps[sel], coeffs[sel], u)
    if normalized:
        logs = logs - logs.max(axis=1, keepdims=True)
        scale = np.prod((1.0 + np.abs(z) ** 2) ** (0.5 * np.asarray(degree)), axis=1)
        return (np.exp(logs) * polys).sum(axis=1) / scale
    return (np.exp(logs) * polys).sum(axis=1)
