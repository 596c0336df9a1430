"""Non-classicality depth: certified bisection over Gaussian regularization.

Positivity of a regularized P function is decided on its sign function
(the distribution divided by its largest Gaussian envelope and by
``prod_i (1 + |z_i|^2)^(deg_i/2)``, deg_i the degree in mode i).  Envelopes are strictly positive, so the sign is
unchanged, but negative regions far out in phase space no longer underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .fock import FockOperator, eigen_hermitian
from .polygauss import as_sum
from .quasiprob import char_normal, regularize

__all__ = [
    "DepthResult",
    "MinSearchConfig",
    "NonpositivityCertificate",
    "TruncationArtifactError",
    "bochner_check",
    "certify_nonpositive",
    "depth",
    "global_min",
    "is_regularized",
]

CLASSICAL = "classical"
NONCLASSICAL = "nonclassical"
SUSPECT = "nonpositive-suspect"


class TruncationArtifactError(RuntimeError):
    """Regularization fails beyond tau=1 although the spectrum is non-negative."""


@dataclass(frozen=True)
class MinSearchConfig:
    n_radii: int = 16
    n_phases: int = 8
    refine: int = 6
    local_tol: float = 1e-12
    abs_tol: float = 1e-10
    bisection_tol: float = 1e-4
    # sign-function search reaches this many envelope widths out
    far_radius: float = 1e3
    radius_strategy: str = "coefficient"

    def __post_init__(self):
        for name in ("local_tol", "abs_tol", "bisection_tol", "far_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_radii < 2 or self.n_phases < 1 or self.refine < 1:
            raise ValueError("multistart grid too small")


@dataclass(frozen=True)
class DepthResult:
    tau_m: float
    bracket: tuple
    witness_point: np.ndarray | None
    status: str
    witness_value: float | None = None

    def to_dict(self) -> dict:
        wp = [] if self.witness_point is None else [v for z in self.witness_point for v in (z.real, z.imag)]
        return {
            "tau_m": self.tau_m,
            "bracket": list(self.bracket),
            "status": self.status,
            "witness": [float(v) for v in wp],
        }


def coefficient_radius(pg, tol: float) -> float:
    """Radius beyond which |pg| < tol, from coefficient magnitudes.

    Each term is bounded by its envelope prefactor times
    exp(-(r - |c|)^2 / w_max) * sum |coef| (r + |c|)^deg.
    """
    rs = np.concatenate([np.linspace(0, 10, 2001)[1:], np.geomspace(10, 1e5, 4000)])
    logb = np.full_like(rs, -np.inf)
    for t in pg.terms:
        if not len(t.coeffs):
            continue
        wmax, cmax = max(t.width), max(abs(c) for c in t.center)
        pref = -sum(math.log(math.pi * w) for w in t.width)
        deg = t.exps.sum(axis=1)
        mags = np.abs(t.coeffs)
        shifted = np.maximum(rs - cmax, 0.0)
        with np.errstate(divide="ignore"):
            poly = np.log(np.sum(mags[None, :] * (rs[:, None] + cmax) ** deg[None, :], axis=1))
        logb = np.logaddexp(logb, pref - shifted**2 / wmax + poly)
    above = np.flatnonzero(logb >= math.log(tol))
    if not above.size:
        return float(rs[0])
    return float(rs[min(above[-1] + 1, len(rs) - 1)])


def _mode_grid(radii, n_phases):
    pts = [0j]
    phases = np.exp(2j * np.pi * np.arange(n_phases) / n_phases)
    for r in radii:
        if r > 0:
            pts.extend(r * phases)
    return np.array(pts)


def _start_points(pg, cfg, normalized):
    m = pg.modes
    if normalized:
        wmin = min(min(t.width) for t in pg.terms)
        wmax = max(max(t.width) for t in pg.terms)
        radii = np.geomspace(0.05 * math.sqrt(wmin), cfg.far_radius * math.sqrt(wmax), cfg.n_radii - 1)
    else:
        radii = np.linspace(0, coefficient_radius(pg, cfg.abs_tol), cfg.n_radii)[1:]
    grid = _mode_grid(radii, cfg.n_phases)
    if m <= 2:
        mesh = np.meshgrid(*([grid] * m), indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
    else:
        u = qmc.Halton(2 * m, seed=0).random(20000)
        r = np.sqrt(u[:, :m]) * radii[-1]
        pts = r * np.exp(2j * np.pi * u[:, m:])
    # displaced pieces peak at their centres
    centers = np.array([t.center for t in pg.terms], dtype=np.complex128)
    return np.concatenate([pts, centers])


def _to_real(z):
    return np.concatenate([z.real, z.imag])


def _to_complex(x, m):
    return x[:m] + 1j * x[m:]


def global_min(pg, cfg: MinSearchConfig | None = None, normalized: bool = False):
    """Deterministic multistart minimum of a regularized distribution.

    With ``normalized=True`` the sign function is minimized instead of the
    distribution itself.  Returns ``(value, point)``.
    """
    cfg = cfg or MinSearchConfig()
    pg = as_sum(pg)
    if not any(len(t.coeffs) for t in pg.terms):
        raise ValueError("degenerate distribution (no coefficients)")
    m = pg.modes
    f_batch = pg.sign_function if normalized else pg
    starts = _start_points(pg, cfg, normalized)
    vals = f_batch(starts).real
    order = np.lexsort((np.arange(len(vals)), vals))
    best_val, best_pt = float(vals[order[0]]), starts[order[0]]

    def fun(x):
        return float(f_batch(_to_complex(x, m)[None, :]).real[0])

    def jac(x):
        h = 1e-6 * max(1.0, float(np.abs(x).max()))
        eye = np.eye(len(x)) * h
        probe = np.concatenate([x + eye, x - eye])
        v = f_batch(np.array([_to_complex(p, m) for p in probe])).real
        return (v[: len(x)] - v[len(x) :]) / (2 * h)

    seen = []
    for idx in order:
        if len(seen) >= cfg.refine:
            break
        p = starts[idx]
        if any(np.abs(p - q).max() < 1e-9 for q in seen):
            continue
        seen.append(p)
        res = minimize(fun, _to_real(p), jac=jac, method="BFGS", options={"gtol": cfg.local_tol, "maxiter": 400})
        if np.isfinite(res.fun) and res.fun < best_val:
            best_val, best_pt = float(res.fun), _to_complex(res.x, m)
    return best_val, best_pt


def is_regularized(rho: FockOperator, tau: float, cfg: MinSearchConfig | None = None):
    """(True, None) when R_tau[P] >= -abs_tol everywhere, else (False, witness point)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    cfg = cfg or MinSearchConfig()
    try:
        pg = regularize(rho, tau)
    except OverflowError:
        return False, None
    value, point = global_min(pg, cfg, normalized=True)
    if value >= -cfg.abs_tol:
        return True, None
    return False, point


def depth(rho: FockOperator, tau_max: float = 4.0, cfg: MinSearchConfig | None = None) -> DepthResult:
    """Minimal regularization making the P function non-negative (bisection)."""
    if tau_max < 1:
        raise ValueError("tau_max must be >= 1")
    cfg = cfg or MinSearchConfig()
    ok, pt = is_regularized(rho, tau_max, cfg)
    if not ok:
        return DepthResult(tau_max, (tau_max, math.inf), pt, SUSPECT, _sign_at(rho, tau_max, pt))
    lo = cfg.bisection_tol
    ok, pt = is_regularized(rho, lo, cfg)
    if ok:
        return DepthResult(0.0, (0.0, lo), None, CLASSICAL)
    hi, witness = tau_max, pt
    while hi - lo > cfg.bisection_tol:
        mid = 0.5 * (lo + hi)
        ok, pt = is_regularized(rho, mid, cfg)
        if ok:
            hi = mid
        else:
            lo, witness = mid, pt
    status = SUSPECT if lo >= 1.0 else NONCLASSICAL
    return DepthResult(0.5 * (lo + hi), (lo, hi), witness, status, _sign_at(rho, lo, witness))


def _sign_at(rho, tau, point):
    if point is None:
        return None
    try:
        return float(regularize(rho, tau).sign_function(point[None, :]).real[0])
    except OverflowError:
        return None


@dataclass(frozen=True)
class NonpositivityCertificate:
    nonpositive: bool
    min_eigenvalue: float
    eigenvector: np.ndarray
    depth: DepthResult
    regularization_failed: bool
    notes: list = field(default_factory=list)


def certify_nonpositive(rho: FockOperator, cfg: MinSearchConfig | None = None, tau_max: float = 4.0,
                        margin: float = 0.05) -> NonpositivityCertificate:
    """Combine failed-regularization evidence with a spectral certificate."""
    if not rho.hermitian:
        raise ValueError("operator must be Hermitian")
    if not rho.is_unit_trace():
        raise ValueError("operator must have unit trace")
    res = depth(rho, tau_max, cfg)
    vals, vecs = eigen_hermitian(rho)
    scale = max(1.0, float(np.abs(vals).max()))
    negative = bool(vals[0] < -1e-12 * scale)
    failed = res.status == SUSPECT and res.bracket[0] >= 1.0 + margin
    if failed and not negative:
        raise TruncationArtifactError(
            f"regularization fails beyond tau={res.bracket[0]:.4f} but the spectrum is non-negative "
            f"(min {vals[0]:.3e}); increase the truncation"
        )
    notes = []
    if negative and not failed:
        notes.append("negative spectrum with regularizable distribution")
    return NonpositivityCertificate(negative, float(vals[0]), vecs[:, 0], res, failed, notes)


def bochner_points(n: int, radius: float, modes: int, seed: int) -> np.ndarray:
    u = qmc.Halton(2 * modes, scramble=True, seed=seed).random(n)
    r = radius * np.sqrt(u[:, :modes])
    return r * np.exp(2j * np.pi * u[:, modes:])


def bochner_check(rho: FockOperator, tau: float, n_samples: int = 64, seed: int = 0xB0C4,
                  radius: float | None = None) -> bool:
    """Positive-definiteness of beta -> exp(-tau|beta|^2) chi(beta) on a sample set.

    A necessary condition for R_tau[P] >= 0; never the deciding test.
    """
    if n_samples < 2:
        raise ValueError("need at least two sample points")
    radius = 3.0 / math.sqrt(tau) if radius is None else radius
    pts = bochner_points(n_samples, radius, rho.modes, seed)
    diff = (pts[:, None, :] - pts[None, :, :]).reshape(-1, rho.modes)
    k = np.exp(-tau * (np.abs(diff) ** 2).sum(axis=1)) * char_normal(rho, diff)
    gram = k.reshape(n_samples, n_samples)
    gram = 0.5 * (gram + gram.conj().T)
    ev = np.linalg.eigvalsh(gram)
    return bool(ev[0] >= -1e-8 * max(np.abs(ev).max(), 1e-300))
