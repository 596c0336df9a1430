import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_state
from nonclassical.fock import FockOperator, coherent_expectation
from nonclassical.quasiprob import char_normal, eval_pg, regularize
from nonclassical.scaling import (
    WitnessSpec,
    a_grid,
    char_scaled,
    detect,
    dual_lambda,
    lambda_map,
    witness,
    witness_expectation,
)
from nonclassical.states import coherent, diosi, fock, fock_mix, sigma_ansatz, thermal, vacuum, werner_state


def diosi_closed_form(a, beta):
    r2 = abs(beta) ** 2
    return 2 / (a * a + 1) * math.exp(-r2 / (1 + a * a)) - math.exp(-r2)


@pytest.mark.parametrize("eps", [0.01, 0.1])
@pytest.mark.parametrize("a", [0.8, 1.2, 2.0])
def test_fock_mixture_diagonal(eps, a):
    out = lambda_map(fock_mix([1 - eps, 0, eps], 6), a)
    expected = [1 - 2 * eps * a**2 + eps * a**4, 2 * eps * a**2 * (1 - a**2), eps * a**4]
    assert np.allclose(np.diag(out.matrix)[:3].real, expected, atol=1e-12)
    assert np.allclose(np.diag(out.matrix)[3:], 0)


def test_attenuation_of_fock1_is_binomial():
    out = lambda_map(fock(1, 3), 0.6)
    assert np.allclose(np.diag(out.matrix).real, [1 - 0.36, 0.36, 0])


def test_trace_preserved_and_composition(rng):
    rho = random_state(rng, (6,))
    assert lambda_map(rho, 1.7).trace() == pytest.approx(1.0, abs=1e-12)
    lhs = lambda_map(lambda_map(rho, 1.3), 0.7).matrix
    assert np.allclose(lhs, lambda_map(rho, 0.91).matrix, atol=1e-12)
    assert np.allclose(lambda_map(rho, 1.0).matrix, rho.matrix)


def test_two_mode_map_is_modewise(rng):
    a = random_state(rng, (3,))
    b = random_state(rng, (3,))
    from nonclassical.fock import tensor

    lhs = lambda_map(tensor(a, b), 1.4).matrix
    rhs = np.kron(lambda_map(a, 1.4).matrix, lambda_map(b, 1.4).matrix)
    assert np.allclose(lhs, rhs, atol=1e-13)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(0.3, 2.5), seed=st.integers(0, 2**16))
def test_duality(a, seed):
    rng = np.random.default_rng(seed)
    rho = random_state(rng, (5,))
    x = random_hermitian(rng, (5,))
    lhs = np.trace(rho.matrix @ dual_lambda(x, a).matrix)
    rhs = np.trace(lambda_map(rho, a).matrix @ x.matrix)
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


def test_char_scaled(rng):
    rho = random_state(rng, (4,))
    beta = np.array([[0.3 - 0.2j], [0.5j]])
    assert np.allclose(char_scaled(rho, 1.5, beta), char_normal(lambda_map(rho, 1.5), beta))


@pytest.mark.parametrize("a", [0.6, 1.4])
def test_commutes_with_regularization(rng, a):
    rho = random_state(rng, (4,))
    z = rng.normal(size=8) + 1j * rng.normal(size=8)
    tau = 0.45
    lhs = eval_pg(regularize(lambda_map(rho, a), a * a * tau), z)
    rhs = eval_pg(regularize(rho, tau).dilate(a), z)
    assert np.allclose(lhs, rhs, atol=1e-12)


@pytest.mark.parametrize("a", [1.5, 2.0])
def test_diosi_detection_formula(a):
    mapped = lambda_map(diosi(), a)
    for beta in (0, 0.3 + 0.4j, 1.2, -2.0j):
        assert coherent_expectation(mapped, beta) == pytest.approx(diosi_closed_form(a, beta), abs=1e-12)
    assert diosi_closed_form(2, 0) == pytest.approx(-0.6)


def test_analytic_dilation_of_thermal():
    out = lambda_map(thermal(0.5), 2.0)
    n = np.arange(10)
    assert np.allclose(np.diag(out.matrix)[:10].real, 2.0**n / 3.0 ** (n + 1), atol=1e-12)


def test_witness_duality(rng):
    rho = random_state(rng, (6,))
    spec = WitnessSpec(1.8, (0.4 - 0.1j,), (6,))
    w = witness(spec)
    assert np.trace(rho.matrix @ w.matrix).real == pytest.approx(
        coherent_expectation(lambda_map(rho, 1.8), 0.4 - 0.1j), abs=1e-10)


@pytest.mark.parametrize("rho", [vacuum(), coherent(0.8 - 0.4j), thermal(1.0), sigma_ansatz(0.7)])
def test_witness_non_negative_on_classical_states(rho):
    rng = np.random.default_rng(5)
    for _ in range(10):
        beta = tuple(rng.normal(size=rho.modes) + 1j * rng.normal(size=rho.modes))
        val = witness_expectation(rho, WitnessSpec(rng.uniform(0.5, 3.0), beta, rho.dims))
        assert val >= -1e-9


def test_witness_spec_validation():
    with pytest.raises(ValueError):
        WitnessSpec(0.0, (0,), (4,))
    with pytest.raises(ValueError):
        WitnessSpec(1.0, (0, 0), (4,))
    with pytest.raises(ValueError):
        lambda_map(fock(1, 3), -1)


def test_a_grid():
    g = a_grid(1.1, cap=2.0)
    assert g[0] == 1.1 and g[-1] == 2.0
    assert all(b > a for a, b in zip(g, g[1:]))
    assert a_grid(3.0, cap=2.0) == [3.0]


def test_detect_diosi():
    rep = detect(diosi())
    assert rep.found and rep.a_used == pytest.approx(2.0)
    assert rep.expectation <= -0.5
    assert rep.a_bound == pytest.approx(1.0, abs=1e-3)


def test_detect_classical_and_fixed_a():
    assert not detect(thermal(1.0)).found
    rep = detect(fock(1), a_values=[1.5])
    assert rep.found and rep.a_used == 1.5
    assert rep.expectation == pytest.approx(1 - 1.5**2, abs=1e-9)


def test_detect_entangled_werner():
    rep = detect(werner_state(0.6))
    assert rep.found and rep.expectation < 0
    assert rep.a_used > rep.a_bound
