import math

import numpy as np
import pytest
from scipy.integrate import quad

from nonclassical.depth import depth
from nonclassical.entanglement import (
    CSV_COLUMNS,
    SeparabilityError,
    beta_s_closed_form,
    classicality_threshold,
    classicality_threshold_numeric,
    min_mix_separable,
    ncde,
    ncde_sweep,
    negativity,
    pt_min_eigenvalue,
    sweep_csv,
)
from nonclassical.fock import FockOperator, tensor
from nonclassical.states import fock, sigma_ansatz, thermal, werner_state


@pytest.mark.parametrize("p", np.linspace(0, 1, 21))
def test_werner_negativity(p):
    assert negativity(werner_state(p)) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-10)


def test_werner_entries():
    rho = werner_state(1.0, (2, 2))
    phi = np.array([1, 0, 0, 1]) / math.sqrt(2)
    assert np.allclose(rho.matrix, np.outer(phi, phi))
    assert np.allclose(werner_state(0.0, (2, 2)).matrix, np.eye(4) / 4)
    with pytest.raises(ValueError):
        werner_state(1.2)


def test_product_state_has_zero_negativity():
    assert negativity(tensor(fock(1, 3), fock(2, 3))) == pytest.approx(0.0, abs=1e-14)


def test_sigma_marginal_against_radial_integral():
    t = 0.5
    rho = sigma_ansatz(t, (32, 32))
    marginal = np.einsum("ajbj->ab", rho.tensor_view()).real

    def entry(n):
        f = lambda r: (r * r + t) / (2 * math.pi * t * t) * math.exp(-r * r / t - r * r) * r ** (2 * n) \
            / math.factorial(n) * 2 * math.pi * r
        return quad(f, 0, np.inf, epsabs=1e-14)[0]

    for n in range(6):
        assert marginal[n, n] == pytest.approx(entry(n), abs=1e-10)
    assert rho.is_unit_trace()


def test_sigma_validation():
    with pytest.raises(ValueError):
        sigma_ansatz(0.0)


def test_classicality_threshold_closed_form():
    assert classicality_threshold(1.0, 1.0) == 0.0
    assert classicality_threshold(1 / 3, 2 / 3) == pytest.approx(0.0, abs=1e-15)
    assert classicality_threshold(0.6, 0.7) == pytest.approx(2.014, abs=1e-3)


def test_classicality_threshold_numeric_differs_by_pi_squared():
    num = classicality_threshold_numeric(0.6, 0.7)
    assert num * math.pi**2 == pytest.approx(classicality_threshold(0.6, 0.7), rel=1e-4)


def test_beta_s_closed_form():
    assert beta_s_closed_form(1 / 3, 0.5) == 0.0
    assert beta_s_closed_form(1.0, 1.0) == pytest.approx(16 / 3)
    assert beta_s_closed_form(0.6, 0.7) == pytest.approx(1.5906, abs=3e-4)


def test_min_mix_separable_matches_closed_form():
    kappa, rho_s = min_mix_separable(werner_state(0.6), sigma_ansatz(0.7))
    assert kappa == pytest.approx(beta_s_closed_form(0.6, 0.7), rel=1e-8)
    assert abs(pt_min_eigenvalue(rho_s)) <= 1e-10
    assert rho_s.is_unit_trace(1e-7)


def test_min_mix_boundary_at_p_one():
    kappa, rho_s = min_mix_separable(werner_state(1.0), sigma_ansatz(0.9), tol=1e-10)
    assert -1e-10 <= pt_min_eigenvalue(rho_s) <= 1e-10
    assert kappa > 0


def test_separable_input_needs_no_admixture():
    rho = werner_state(0.2)
    kappa, rho_s = min_mix_separable(rho, sigma_ansatz(0.7))
    assert kappa == 0.0 and rho_s is rho


def test_min_mix_fails_without_classical_weight():
    # sigma without the needed block weight cannot repair the state
    with pytest.raises(SeparabilityError):
        min_mix_separable(werner_state(1.0, (2, 2)), FockOperator((2, 2), np.diag([1.0, 0, 0, 0])), kappa_max=64)


@pytest.mark.parametrize("p", [0.2, 1 / 3])
def test_ncde_zero_for_separable(p):
    res = ncde(werner_state(p), p=p)
    assert res.n_e == 0.0 and res.method == "separable"
    assert res.tau_m_rho == pytest.approx((1 + p) / 2, abs=1e-3)


@pytest.mark.slow
def test_ncde_positive_and_growing():
    grid = (0.5, 0.75, 1.0)
    lo, hi = ncde(werner_state(0.6), grid, p=0.6), ncde(werner_state(0.9), grid, p=0.9)
    assert 0 < lo.n_e <= hi.n_e
    assert not lo.discrepancy and not hi.discrepancy
    assert lo.tau_m_rho_s < lo.tau_m_rho


def test_sigma_mixing_lowers_werner_depth():
    s = sigma_ansatz(0.7)
    _, rho_s = min_mix_separable(werner_state(0.8), s)
    assert depth(rho_s).tau_m < 0.9 - 1e-3


def test_sweep_csv_format():
    rows = ncde_sweep((0.0, 0.3), (0.5,))
    text = sweep_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "0" and first[8] == "separable"
    assert text == sweep_csv(ncde_sweep((0.3, 0.0), (0.5,)))


def test_requires_two_modes():
    with pytest.raises(ValueError):
        negativity(thermal(0.2))
