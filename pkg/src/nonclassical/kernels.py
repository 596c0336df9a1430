"""Kernel selection: compiled extension when built, numpy fallback otherwise.

Set ``NONCLASSICAL_PURE_PYTHON=1`` to force the fallback.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("NONCLASSICAL_PURE_PYTHON"):
        raise ImportError("pure-python kernels requested")
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"

__all__ = ["BACKEND", "Packed", "pack", "packed_eval", "poly_eval", "use_backend"]


def use_backend(name: str) -> None:
    """Switch backend at runtime ('cython' or 'python'); used by the benchmark."""
    global _impl, BACKEND
    if name == "python":
        _impl = _kernels_py
    elif name == "cython":
        from . import _kernels

        _impl = _kernels
    else:
        raise ValueError(name)
    BACKEND = name


@dataclass(frozen=True)
class Packed:
    exps: np.ndarray
    coeffs: np.ndarray
    owner: np.ndarray
    widths: np.ndarray
    centers: np.ndarray
    logpref: np.ndarray
    degree: np.ndarray  # per mode: max of k_i + l_i


def pack(terms) -> Packed:
    m = terms[0].modes
    exps = np.concatenate([t.exps for t in terms]).astype(np.int64).reshape(-1, 2 * m)
    coeffs = np.concatenate([t.coeffs for t in terms]).astype(np.complex128)
    owner = np.concatenate([np.full(len(t.coeffs), i, dtype=np.int64) for i, t in enumerate(terms)])
    widths = np.array([t.width for t in terms], dtype=float)
    centers = np.array([t.center for t in terms], dtype=np.complex128)
    with np.errstate(divide="ignore"):
        logpref = -np.log(np.pi * widths).sum(axis=1)
    pairs = exps.reshape(len(exps), m, 2).sum(axis=2)
    degree = np.ascontiguousarray(pairs.max(axis=0) if len(exps) else np.zeros(m), dtype=float)
    return Packed(
        np.ascontiguousarray(exps), coeffs, owner, np.ascontiguousarray(widths),
        np.ascontiguousarray(centers), logpref, degree,
    )


def packed_eval(pk: Packed, z: np.ndarray, normalized: bool) -> np.ndarray:
    z = np.ascontiguousarray(z, dtype=np.complex128)
    return np.asarray(
        _impl.packed_eval(pk.exps, pk.coeffs, pk.owner, pk.widths, pk.centers, pk.logpref, pk.degree, z, normalized)
    )


def poly_eval(exps, coeffs, u) -> np.ndarray:
    return np.asarray(
        _impl.poly_eval(
            np.ascontiguousarray(exps, dtype=np.int64),
            np.ascontiguousarray(coeffs, dtype=np.complex128),
            np.ascontiguousarray(u, dtype=np.complex128),
        )
    )
