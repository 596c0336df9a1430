"""Truncated multimode Fock-space operators."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import reduce
from math import exp, lgamma

import numpy as np

from .polygauss import PolyGaussian, cgauss_moment

__all__ = [
    "FockOperator",
    "adjoint",
    "coherent_expectation",
    "coherent_vector",
    "eigen_hermitian",
    "embed",
    "frobenius_norm",
    "from_json",
    "partial_transpose",
    "scale_add",
    "tensor",
    "term_matrix",
    "to_json",
    "trace",
]

HERMITIAN_TOL = 1e-12
UNIT_TRACE_TOL = 1e-10
DEFAULT_DIM_SINGLE = 24
DEFAULT_DIM_TWO = 12
MAX_TAIL = 1e-8


class TruncationError(ValueError):
    """Truncated representation loses more weight than allowed."""


@dataclass(frozen=True, eq=False)
class FockOperator:
    """Operator on a truncated tensor-product Fock space.

    ``matrix`` is the truncated operator used for linear algebra.  Operators
    built from classical phase-space densities also keep those densities in
    ``terms`` (P functions with non-zero width, or point masses) so that
    phase-space quantities can be computed without truncation error;
    ``residual`` is the exactly supported remainder, so that
    ``matrix == residual + sum(term_matrix(t))``.  ``tail`` is the trace
    weight lost by the truncation.
    """

    dims: tuple
    matrix: np.ndarray
    hermitian: bool = True
    terms: tuple = ()
    residual: np.ndarray | None = None
    tail: float = 0.0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise ValueError(f"every mode needs dimension >= 2, got {dims}")
        size = int(np.prod(dims))
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.shape != (size, size):
            raise ValueError(f"matrix shape {mat.shape} does not match dims {dims}")
        if self.hermitian:
            scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
            if np.abs(mat - mat.conj().T).max(initial=0.0) > HERMITIAN_TOL * scale:
                raise ValueError("matrix flagged Hermitian but is not")
        res = mat if self.residual is None else np.array(self.residual, dtype=np.complex128)
        if res.shape != mat.shape:
            raise ValueError("residual shape mismatch")
        for t in self.terms:
            if t.modes != len(dims):
                raise ValueError("phase-space term mode mismatch")
        mat.setflags(write=False)
        if res is not mat:
            res.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "residual", res)
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def modes(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_unit_trace(self, tol: float = UNIT_TRACE_TOL) -> bool:
        # the lost tail weight is part of the state, not an error
        return abs(self.trace() + self.tail - 1.0) <= tol

    def tensor_view(self) -> np.ndarray:
        return self.matrix.reshape(self.dims + self.dims)

    @classmethod
    def from_matrix(cls, matrix, dims=None, hermitian=True) -> FockOperator:
        matrix = np.asarray(matrix, dtype=np.complex128)
        if dims is None:
            dims = (matrix.shape[0],)
        return cls(tuple(dims), matrix, hermitian)

    @classmethod
    def from_terms(cls, terms, dims, residual=None, hermitian=True, max_tail=MAX_TAIL) -> FockOperator:
        """Operator whose P function is (residual's) + the given analytic densities."""
        dims = tuple(dims)
        size = int(np.prod(dims))
        res = np.zeros((size, size), dtype=np.complex128) if residual is None else np.asarray(residual, complex)
        mat = res.copy()
        tail = 0.0
        for t in terms:
            block = term_matrix(t, dims)
            mat += block
            tail += abs(t.integral() - np.trace(block))
        if max_tail is not None and tail > max_tail:
            raise TruncationError(f"truncation tail {tail:.3e} exceeds {max_tail:.1e} at dims {dims}")
        return cls(dims, mat, hermitian, tuple(terms), res, float(tail))


def coherent_vector(z: complex, dim: int) -> np.ndarray:
    """Truncated number-basis amplitudes <n|z>, n < dim (not renormalized)."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    n = np.arange(dim)
    logfact = np.cumsum(np.log(np.maximum(n, 1)))
    z = complex(z)
    if z == 0:
        v = np.zeros(dim, dtype=np.complex128)
        v[0] = 1.0
        return v
    mag = np.exp(-0.5 * abs(z) ** 2 + n * np.log(abs(z)) - 0.5 * logfact)
    return mag * np.exp(1j * np.angle(z) * n)


def _coherent_product(z, dims) -> np.ndarray:
    return reduce(np.kron, [coherent_vector(zi, d) for zi, d in zip(z, dims)])


def _as_point(z, modes) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if z.shape != (modes,):
        raise ValueError(f"coherent point has {z.size} amplitudes, operator has {modes} modes")
    return z


def term_matrix(term: PolyGaussian, dims) -> np.ndarray:
    """Truncated number-basis matrix of an analytic P-function piece."""
    if len(dims) != term.modes:
        raise ValueError("mode mismatch")
    if term.is_delta or any(c != 0 for c in term.center):
        if len(term.exps) and term.exps.any():
            raise ValueError("displaced or delta pieces must have constant polynomials")
        out = 0
        for w, c, d in zip(term.width, term.center, dims):
            # displaced Gaussian of width w: mixture of coherent states
            if w == 0:
                v = coherent_vector(c, d)
                block = np.outer(v, v.conj())
            else:
                block = _displaced_thermal(c, w, d)
            out = block if isinstance(out, int) else np.kron(out, block)
        weight = term.coeffs[0] if len(term.coeffs) else 0
        return weight * out
    total = np.zeros((int(np.prod(dims)),) * 2, dtype=np.complex128)
    for e, c in zip(term.exps, term.coeffs):
        blocks = [_centered_block(int(e[2 * i]), int(e[2 * i + 1]), term.width[i], d) for i, d in enumerate(dims)]
        total += c * reduce(np.kron, blocks)
    return total


def _centered_block(k, l, w, d):
    # <m| (int d2a (pi w)^-1 e^{-|a|^2/w} a^k conj(a)^l |a><a|) |n>
    s = w / (1.0 + w)
    out = np.zeros((d, d), dtype=np.complex128)
    for m in range(d):
        n = m + k - l
        if 0 <= n < d:
            p = m + k
            out[m, n] = np.exp(
                -np.log1p(w) + sum(np.log(np.arange(1, p + 1))) + p * np.log(s)
                - 0.5 * (sum(np.log(np.arange(1, m + 1))) + sum(np.log(np.arange(1, n + 1))))
            )
    return out


def _displaced_thermal(c, w, d):
    s = w / (1.0 + w)
    mu = c / (1.0 + w)
    pref = np.exp(-abs(c) ** 2 / (1.0 + w)) / (1.0 + w)
    out = np.empty((d, d), dtype=np.complex128)
    for m in range(d):
        for n in range(d):
            out[m, n] = pref * cgauss_moment(m, n, mu, np.conj(mu), s) * exp(-0.5 * (lgamma(m + 1) + lgamma(n + 1)))
    return out


def _term_pairing(term: PolyGaussian, beta, a: float = 1.0) -> complex:
    """int P_term(alpha) |<beta|a alpha>|^2 d^2alpha (product over modes)."""
    total = 0j
    if len(term.coeffs) == 0:
        return total
    for e, coef in zip(term.exps, term.coeffs):
        val = coef
        for i in range(term.modes):
            w, c, b = term.width[i], term.center[i], complex(beta[i])
            k, l = int(e[2 * i]), int(e[2 * i + 1])
            den = 1.0 + a * a * w
            s = w / den
            mu = (c + a * w * b) / den
            val *= np.exp(-abs(b - a * c) ** 2 / den) / den * cgauss_moment(k, l, mu - c, np.conj(mu - c), s)
        total += val
    return total


def coherent_expectation(rho: FockOperator, z) -> float:
    """<z|rho|z> for a (multimode) coherent point."""
    z = _as_point(z, rho.modes)
    val = complex(_quad(rho.residual, z, rho.dims)) + sum(_term_pairing(t, z) for t in rho.terms)
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)) and rho.hermitian:
        raise ArithmeticError(f"imaginary residue {val.imag:.3e} in a Hermitian expectation")
    return float(val.real)


def _quad(matrix, z, dims):
    if not np.any(matrix):
        return 0j
    v = _coherent_product(z, dims)
    return np.vdot(v, matrix @ v)


def eigen_hermitian(rho: FockOperator):
    """Ascending spectrum and orthonormal eigenvectors (columns)."""
    if not rho.hermitian:
        raise ValueError("eigen_hermitian needs a Hermitian operator")
    vals, vecs = np.linalg.eigh(rho.matrix)
    return vals, vecs


def _blocks(matrix):
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    _, labels = connected_components(csr_matrix(np.abs(matrix) > 0), directed=False)
    order = np.argsort(labels, kind="stable")
    cuts = np.flatnonzero(np.diff(labels[order])) + 1
    return np.split(order, cuts)


def spectrum(matrix: np.ndarray) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix via its connected blocks (ascending)."""
    groups = _blocks(matrix)
    single = np.concatenate([g for g in groups if len(g) == 1] or [np.zeros(0, dtype=int)])
    vals = [matrix[single, single].real]
    vals += [np.linalg.eigvalsh(matrix[np.ix_(g, g)]) for g in groups if len(g) > 1]
    return np.sort(np.concatenate(vals))


def min_eigenvalue(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix, exploiting block sparsity."""
    return float(spectrum(matrix)[0])


def tensor(rho_a: FockOperator, rho_b: FockOperator) -> FockOperator:
    dims = rho_a.dims + rho_b.dims
    mat = np.kron(rho_a.matrix, rho_b.matrix)
    herm = rho_a.hermitian and rho_b.hermitian
    if rho_a.terms and rho_b.terms and not np.any(rho_a.residual) and not np.any(rho_b.residual):
        terms = tuple(_term_product(ta, tb) for ta in rho_a.terms for tb in rho_b.terms)
        return FockOperator(dims, mat, herm, terms, np.zeros_like(mat), _tail_of(terms, mat))
    # mixed residual/analytic products fall back to the truncated matrix
    return FockOperator(dims, mat, herm, (), None, float(abs(1 - (1 - rho_a.tail) * (1 - rho_b.tail))) if rho_a.tail or rho_b.tail else 0.0)


def _tail_of(terms, mat):
    return float(abs(sum(t.integral() for t in terms) - np.trace(mat)))


def _term_product(ta: PolyGaussian, tb: PolyGaussian) -> PolyGaussian:
    na, nb = len(ta.exps), len(tb.exps)
    exps = np.hstack([np.repeat(ta.exps, nb, axis=0), np.tile(tb.exps, (na, 1))])
    coeffs = np.repeat(ta.coeffs, nb) * np.tile(tb.coeffs, na)
    return PolyGaussian(ta.modes + tb.modes, ta.tau, exps, coeffs, ta.width + tb.width, ta.center + tb.center)


def partial_transpose(rho: FockOperator, mode: int = 1) -> FockOperator:
    """Transpose the bra/ket indices of one mode (0-based index)."""
    m = rho.modes
    if not 0 <= mode < m:
        raise ValueError(f"mode {mode} out of range for {m} modes")
    t = rho.tensor_view()
    axes = list(range(2 * m))
    axes[mode], axes[m + mode] = axes[m + mode], axes[mode]

    def pt(mat):
        return np.transpose(mat.reshape(rho.dims + rho.dims), axes).reshape(rho.size, rho.size)

    mat = np.transpose(t, axes).reshape(rho.size, rho.size)
    terms = tuple(term.conjugate_mode(mode) for term in rho.terms)
    return FockOperator(rho.dims, mat, rho.hermitian, terms, pt(rho.residual), rho.tail)


def trace(rho: FockOperator) -> complex:
    return rho.trace()


def frobenius_norm(rho: FockOperator) -> float:
    return float(np.linalg.norm(rho.matrix))


def adjoint(rho: FockOperator) -> FockOperator:
    terms = tuple(
        PolyGaussian(t.modes, t.tau, t.exps[:, _swap_cols(t.modes)], np.conj(t.coeffs), t.width,
                     tuple(np.conj(c) for c in t.center))
        for t in rho.terms
    )
    return FockOperator(rho.dims, rho.matrix.conj().T, rho.hermitian, terms, rho.residual.conj().T, rho.tail)


def _swap_cols(m):
    return [v for i in range(m) for v in (2 * i + 1, 2 * i)]


def scale_add(alpha, rho: FockOperator, beta=0.0, sigma: FockOperator | None = None) -> FockOperator:
    """alpha*rho + beta*sigma, keeping analytic pieces exact."""
    if sigma is None:
        terms = tuple(t.scaled(alpha) for t in rho.terms)
        return FockOperator(rho.dims, alpha * rho.matrix, rho.hermitian and np.isreal(alpha), terms,
                            alpha * rho.residual, abs(alpha) * rho.tail)
    if rho.dims != sigma.dims:
        raise ValueError(f"dimension mismatch {rho.dims} vs {sigma.dims}")
    terms = tuple(t.scaled(alpha) for t in rho.terms) + tuple(t.scaled(beta) for t in sigma.terms)
    herm = rho.hermitian and sigma.hermitian and np.isreal(alpha) and np.isreal(beta)
    return FockOperator(
        rho.dims, alpha * rho.matrix + beta * sigma.matrix, bool(herm), terms,
        alpha * rho.residual + beta * sigma.residual, abs(alpha) * rho.tail + abs(beta) * sigma.tail,
    )


def embed(rho: FockOperator, dims) -> FockOperator:
    """Zero-pad an operator into larger per-mode truncations."""
    dims = tuple(dims)
    if len(dims) != rho.modes or any(d < d0 for d, d0 in zip(dims, rho.dims)):
        raise ValueError(f"cannot embed {rho.dims} into {dims}")
    if rho.terms:
        return FockOperator.from_terms(rho.terms, dims, _pad(rho.residual, rho.dims, dims), rho.hermitian, None)
    return FockOperator(dims, _pad(rho.matrix, rho.dims, dims), rho.hermitian)


def _pad(mat, old, new):
    t = np.zeros(tuple(new) + tuple(new), dtype=np.complex128)
    t[tuple(slice(0, d) for d in old) * 2] = mat.reshape(tuple(old) * 2)
    n = int(np.prod(new))
    return t.reshape(n, n)


def to_json(rho: FockOperator) -> str:
    mat = [[[float(v.real), float(v.imag)] for v in row] for row in rho.matrix]
    return json.dumps({"modes": rho.modes, "dims": list(rho.dims), "matrix": mat})


def from_json(text: str, hermitian: bool | None = None) -> FockOperator:
    data = json.loads(text)
    try:
        modes, dims = int(data["modes"]), [int(d) for d in data["dims"]]
        arr = np.asarray(data["matrix"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed operator JSON: {exc}") from exc
    if len(dims) != modes:
        raise ValueError("'modes' does not match length of 'dims'")
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("'matrix' must be a square array of [re, im] pairs")
    mat = arr[..., 0] + 1j * arr[..., 1]
    if hermitian is None:
        scale = max(1.0, float(np.abs(mat).max(initial=0.0)))
        hermitian = bool(np.abs(mat - mat.conj().T).max(initial=0.0) <= HERMITIAN_TOL * scale)
    return FockOperator(tuple(dims), mat, hermitian)
