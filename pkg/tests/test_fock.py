import json
import math

import numpy as np
import pytest

from conftest import random_state
from nonclassical.fock import (
    FockOperator,
    TruncationError,
    coherent_expectation,
    coherent_vector,
    embed,
    from_json,
    min_eigenvalue,
    partial_transpose,
    scale_add,
    spectrum,
    tensor,
    to_json,
)
from nonclassical.polygauss import PolyGaussian
from nonclassical.states import coherent, diosi, fock, sigma_ansatz, thermal, werner_state


def test_rejects_bad_shapes_and_non_hermitian():
    with pytest.raises(ValueError):
        FockOperator((1,), np.eye(1))
    with pytest.raises(ValueError):
        FockOperator((3,), np.eye(4))
    with pytest.raises(ValueError):
        FockOperator((2,), np.array([[0, 1], [0, 0]]))
    op = FockOperator((2,), np.array([[0, 1], [0, 0]]), hermitian=False)
    assert not op.hermitian


def test_matrix_is_read_only():
    rho = fock(1, 4)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 1


def test_coherent_vector_overlap():
    z, w = 0.7 - 0.2j, -0.3 + 0.5j
    vz, vw = coherent_vector(z, 60), coherent_vector(w, 60)
    assert np.vdot(vz, vz) == pytest.approx(1.0, abs=1e-14)
    assert abs(np.vdot(vw, vz)) ** 2 == pytest.approx(math.exp(-abs(z - w) ** 2), abs=1e-14)


def test_thermal_matrix_is_geometric():
    nbar = 0.8
    rho = thermal(nbar)
    n = np.arange(rho.dims[0])
    assert np.allclose(np.diag(rho.matrix).real, nbar**n / (1 + nbar) ** (n + 1), atol=1e-14)
    assert rho.is_unit_trace()


def test_coherent_terms_match_truncated_matrix():
    z = 1.1 + 0.4j
    rho = coherent(z)
    v = coherent_vector(z, rho.dims[0])
    assert np.allclose(rho.matrix, np.outer(v, v.conj()), atol=1e-14)
    beta = 0.2 - 0.9j
    assert coherent_expectation(rho, beta) == pytest.approx(math.exp(-abs(beta - z) ** 2), abs=1e-14)


def test_displaced_thermal_against_displaced_matrix():
    # width-w term centred at c equals D(c) rho_th D(c)^dag
    from scipy.linalg import expm

    c, w, d = 0.5 - 0.3j, 0.4, 60
    term = PolyGaussian(1, 0.0, [[0, 0]], [1.0], (w,), (c,))
    rho = FockOperator.from_terms((term,), (d,))
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    disp = expm(c * a.T - np.conj(c) * a)
    th = np.diag(w ** np.arange(d) / (1 + w) ** (np.arange(d) + 1))
    ref = disp @ th @ disp.conj().T
    assert np.allclose(rho.matrix[:20, :20], ref[:20, :20], atol=1e-12)


def test_diosi_diagonal():
    rho = diosi()
    diag = np.diag(rho.matrix).real
    assert diag[0] == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(diag[1:10], 2.0 ** -np.arange(1, 10), atol=1e-14)


def test_sigma_ansatz_is_symmetrized_product():
    t = 0.6
    rho = sigma_ansatz(t)
    d = rho.dims[0]
    n = np.arange(d)
    th = t**n / (1 + t) ** (n + 1)
    one = (n + 1) * t**n / (1 + t) ** (n + 2)
    ref = 0.5 * (np.kron(np.diag(one), np.diag(th)) + np.kron(np.diag(th), np.diag(one)))
    assert np.allclose(rho.matrix, ref, atol=1e-14)


def test_truncation_gate():
    with pytest.raises(TruncationError):
        thermal(5.0, dim=6)


def test_json_round_trip(rng):
    rho = random_state(rng, (3, 2))
    back = from_json(to_json(rho))
    assert back.dims == rho.dims
    assert np.array_equal(back.matrix, rho.matrix)
    data = json.loads(to_json(rho))
    assert set(data) == {"modes", "dims", "matrix"}


@pytest.mark.parametrize("text", ["{}", '{"modes": 2, "dims": [2], "matrix": []}', "not json",
                                  '{"modes": 1, "dims": [2], "matrix": [[1, 0], [0, 1]]}'])
def test_json_malformed(text):
    with pytest.raises(ValueError):
        from_json(text)


def test_partial_transpose_involution(rng):
    rho = random_state(rng, (3, 3))
    back = partial_transpose(partial_transpose(rho, 1), 1)
    assert np.allclose(back.matrix, rho.matrix)
    with pytest.raises(ValueError):
        partial_transpose(rho, 2)


def test_partial_transpose_werner_spectrum():
    vals = spectrum(partial_transpose(werner_state(1.0, (2, 2))).matrix)
    assert vals[0] == pytest.approx(-0.5)


def test_block_spectrum_matches_dense(rng):
    rho = scale_add(0.5, embed(werner_state(0.7), (12, 12)), 0.5, sigma_ansatz(0.2, (12, 12)))
    dense = np.linalg.eigvalsh(rho.matrix)
    assert np.allclose(spectrum(rho.matrix), dense, atol=1e-13)
    assert min_eigenvalue(rho.matrix) == pytest.approx(dense[0], abs=1e-13)


def test_tensor_keeps_analytic_terms():
    rho = tensor(thermal(0.3), coherent(0.5j))
    assert rho.terms and rho.modes == 2
    assert coherent_expectation(rho, (0.1, 0.2j)) == pytest.approx(
        coherent_expectation(thermal(0.3), 0.1) * coherent_expectation(coherent(0.5j), 0.2j), rel=1e-12)


def test_embed_pads_with_zeros(rng):
    rho = random_state(rng, (2, 3))
    big = embed(rho, (4, 3))
    assert big.trace() == pytest.approx(1.0)
    assert np.allclose(big.tensor_view()[:2, :, :2, :], rho.tensor_view())
    with pytest.raises(ValueError):
        embed(rho, (1, 3))
