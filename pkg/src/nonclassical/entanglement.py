"""Partial-transpose tools and the entanglement depth pipeline for two-mode states."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .depth import MinSearchConfig, depth, global_min
from .fock import FockOperator, embed, min_eigenvalue, partial_transpose, scale_add, spectrum
from .polygauss import PolyGaussian, PolyGaussianSum
from .quasiprob import regularize
from .states import sigma_ansatz, werner_state

__all__ = [
    "CSV_COLUMNS",
    "NcdeResult",
    "SeparabilityError",
    "beta_s_closed_form",
    "classicality_threshold",
    "classicality_threshold_numeric",
    "min_mix_separable",
    "ncde",
    "ncde_sweep",
    "negativity",
    "pt_min_eigenvalue",
    "sigma_ansatz",
    "sweep_csv",
    "werner_state",
]

DEFAULT_TAU_SIGMAS = tuple(round(0.5 + 0.05 * i, 10) for i in range(11))
DEFAULT_P_GRID = tuple(round(0.05 * i, 10) for i in range(21))
DISCREPANCY_REL = 0.05
KAPPA_MAX = 1e4
CSV_COLUMNS = ("p", "tau_m_rho", "tau_sigma_star", "kappa", "tau_m_rho_s", "n_e", "n_e_normalized",
               "negativity", "method", "discrepancy_flag")


class SeparabilityError(RuntimeError):
    """No admixture up to the cap makes the state pass the PPT test."""


def _require_two_mode(rho):
    if rho.modes != 2:
        raise ValueError("a two-mode operator is required")


def pt_min_eigenvalue(rho: FockOperator) -> float:
    _require_two_mode(rho)
    return float(spectrum(partial_transpose(rho, 1).matrix)[0])


def negativity(rho: FockOperator) -> float:
    """Trace norm of the partial transpose minus one: twice the sum of |negative eigenvalues|."""
    _require_two_mode(rho)
    if not rho.hermitian:
        raise ValueError("operator must be Hermitian")
    vals = spectrum(partial_transpose(rho, 1).matrix)
    return float(-2 * vals[vals < 0].sum())


def classicality_threshold(p: float, tau_sigma: float) -> float:
    """Closed-form admixture threshold pi^2 tau^-2 (1 + p - 2 tau) / 2."""
    return math.pi**2 * tau_sigma**-2 * (1 + p - 2 * tau_sigma) / 2


def classicality_threshold_numeric(p: float, tau: float, cfg: MinSearchConfig | None = None,
                                   beta_max: float = 1e3, rtol: float = 1e-6) -> float:
    """Smallest beta with R_tau[P_rho_p] + beta P_sigma(tau) >= 0 everywhere.

    The ansatz P function shares the regularization width, so the sum is a
    single envelope times a polynomial; beta is found by bisection.
    """
    cfg = cfg or MinSearchConfig()
    reg = regularize(werner_state(p, (2, 2)), tau)
    sig = PolyGaussian.from_dict(2, 0.0, {(1, 1, 0, 0): 0.5 / tau**3 / math.pi**2,
                                          (0, 0, 1, 1): 0.5 / tau**3 / math.pi**2}, (tau, tau))
    # scale to the unit-weight convention used elsewhere
    sig = sig.scaled(1.0 / sig.integral())

    def ok(beta):
        if beta == 0:
            return global_min(reg, cfg, normalized=True)[0] >= -cfg.abs_tol
        return global_min(PolyGaussianSum((reg, sig.scaled(beta))), cfg, normalized=True)[0] >= -cfg.abs_tol

    if ok(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while not ok(hi):
        lo, hi = hi, 2 * hi
        if hi > beta_max:
            raise SeparabilityError(f"no classical admixture below beta={beta_max}")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
    return hi


def beta_s_closed_form(p: float, tau_sigma: float) -> float:
    """Minimal admixture (3p-1)(1+tau)^4/(6 tau) for the Werner family; 0 when p <= 1/3."""
    if p <= 1 / 3:
        return 0.0
    return (3 * p - 1) * (1 + tau_sigma) ** 4 / (6 * tau_sigma)


def _common(rho, sigma):
    dims = tuple(max(a, b) for a, b in zip(rho.dims, sigma.dims))
    return (rho if rho.dims == dims else embed(rho, dims)), (sigma if sigma.dims == dims else embed(sigma, dims))


def _mix(rho, sigma, kappa):
    return scale_add(1.0 / (1.0 + kappa), rho, kappa / (1.0 + kappa), sigma)


def min_mix_separable(rho: FockOperator, sigma: FockOperator, tol: float = 1e-10,
                      kappa_max: float = KAPPA_MAX):
    """Smallest kappa with (rho + kappa sigma)/(1 + kappa) passing the PPT test.

    Returns ``(kappa, rho_s)``.
    """
    _require_two_mode(rho)
    original = rho
    rho, sigma = _common(rho, sigma)
    pt_r, pt_s = partial_transpose(rho, 1).matrix, partial_transpose(sigma, 1).matrix

    def f(kappa):
        return min_eigenvalue((pt_r + kappa * pt_s) / (1.0 + kappa))

    if f(0.0) >= -tol:
        return 0.0, original
    hi = 1.0
    while f(hi) < 0:
        hi *= 2
        if hi > kappa_max:
            raise SeparabilityError(f"not PPT for any kappa <= {kappa_max:g}")
    kappa = brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-14)
    # land on the PPT side of the boundary
    while f(kappa) < -tol:
        kappa *= 1 + 1e-12
    return float(kappa), _mix(rho, sigma, kappa)


@dataclass(frozen=True)
class NcdeResult:
    p: float | None
    tau_m_rho: float
    tau_sigma_star: float | None
    kappa: float
    tau_m_rho_s: float
    n_e: float
    negativity: float
    method: str
    discrepancy: bool = False
    records: list = field(default_factory=list)

    @property
    def n_e_normalized(self) -> float:
        return self.n_e / self.tau_m_rho if self.tau_m_rho > 0 else 0.0

    def row(self) -> dict:
        return {
            "p": self.p if self.p is not None else math.nan,
            "tau_m_rho": self.tau_m_rho,
            "tau_sigma_star": math.nan if self.tau_sigma_star is None else self.tau_sigma_star,
            "kappa": self.kappa,
            "tau_m_rho_s": self.tau_m_rho_s,
            "n_e": self.n_e,
            "n_e_normalized": self.n_e_normalized,
            "negativity": self.negativity,
            "method": self.method,
            "discrepancy_flag": int(self.discrepancy),
        }

    def to_dict(self) -> dict:
        out = self.row()
        out["records"] = self.records
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()}


def ncde(rho: FockOperator, tau_sigmas=DEFAULT_TAU_SIGMAS, cfg: MinSearchConfig | None = None,
         p: float | None = None, tau_max: float = 4.0, tol: float = 1e-10) -> NcdeResult:
    """Entanglement part of the depth, minimized over the ansatz family on a grid.

    ``p`` (Werner parameter) enables the closed-form admixture cross-check.
    """
    _require_two_mode(rho)
    cfg = cfg or MinSearchConfig()
    tau_m = depth(rho, tau_max, cfg).tau_m
    neg = negativity(rho)
    if pt_min_eigenvalue(rho) >= -tol:
        return NcdeResult(p, tau_m, None, 0.0, tau_m, 0.0, neg, "separable")
    if not len(tau_sigmas):
        raise ValueError("empty ansatz grid")
    records, best = [], None
    for ts in tau_sigmas:
        sigma = sigma_ansatz(ts)
        kappa, rho_s = min_mix_separable(rho, sigma, tol)
        closed = beta_s_closed_form(p, ts) if p is not None else None
        flag = closed is not None and abs(kappa - closed) > DISCREPANCY_REL * max(abs(closed), 1e-300)
        tau_s = depth(rho_s, tau_max, cfg).tau_m
        rec = {"tau_sigma": ts, "kappa": kappa, "kappa_closed_form": closed, "tau_m_rho_s": tau_s,
               "n_e": tau_m - tau_s, "discrepancy": bool(flag)}
        records.append(rec)
        if best is None or rec["n_e"] < best["n_e"]:
            best = rec
    disc = any(r["discrepancy"] for r in records)
    return NcdeResult(p, tau_m, best["tau_sigma"], best["kappa"], best["tau_m_rho_s"], best["n_e"], neg,
                      "ppt-bisection", disc, records)


def _sweep_point(args):
    p, tau_sigmas, cfg, dims = args
    return ncde(werner_state(p, dims), tau_sigmas, cfg, p=p)


def ncde_sweep(p_grid=DEFAULT_P_GRID, tau_sigmas=DEFAULT_TAU_SIGMAS, cfg: MinSearchConfig | None = None,
               workers: int | None = None, dims=(8, 8)) -> list:
    """NcDE for the Werner family over ``p_grid``; results ordered by p."""
    cfg = cfg or MinSearchConfig()
    jobs = [(float(p), tuple(tau_sigmas), cfg, tuple(dims)) for p in sorted(p_grid)]
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_sweep_point, jobs))
    return [_sweep_point(j) for j in jobs]


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.9g" % v


def sweep_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        row = r.row()
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()
