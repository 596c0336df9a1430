import numpy as np
import pytest

from nonclassical import kernels
from nonclassical.polygauss import PolyGaussian, PolyGaussianSum, cgauss_moment
from nonclassical.quasiprob import regularize
from nonclassical.states import sigma_ansatz, werner_state
from nonclassical.fock import embed, scale_add


@pytest.fixture
def mixture():
    s = sigma_ansatz(0.7)
    return scale_add(0.6, embed(werner_state(0.8), s.dims), 0.4, s)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
@pytest.mark.parametrize("normalized", [False, True])
def test_backends_agree(mixture, normalized):
    pg = regularize(mixture, 0.45)
    z = np.random.default_rng(3).normal(size=(500, 2)) * 2 + 0j
    try:
        kernels.use_backend("cython")
        a = pg.sign_function(z) if normalized else pg(z)
        kernels.use_backend("python")
        b = pg.sign_function(z) if normalized else pg(z)
    finally:
        kernels.use_backend("cython")
    assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


def test_poly_eval_single_monomial():
    z = np.array([[0.3 + 0.4j]])
    v = kernels.poly_eval(np.array([[2, 1]]), np.array([1.5 + 0j]), z)
    assert v[0] == pytest.approx(1.5 * z[0, 0] ** 2 * np.conj(z[0, 0]))


def test_cgauss_moment_against_quadrature():
    # E[z^k conj(z)^l] for z ~ CN(mu, s)
    rng = np.random.default_rng(1)
    mu, s = 0.4 - 0.3j, 0.7
    z = mu + np.sqrt(s / 2) * (rng.normal(size=400_000) + 1j * rng.normal(size=400_000))
    for k, l in [(0, 0), (1, 0), (2, 1), (2, 2)]:
        mc = np.mean(z**k * np.conj(z) ** l)
        assert cgauss_moment(k, l, mu, np.conj(mu), s) == pytest.approx(mc, abs=2e-2)


def test_sign_function_preserves_sign_far_out():
    pg = regularize(werner_state(0.9), 0.9)
    z = np.array([[0.0, 40.0 + 0j]])
    raw = pg(z).real[0]
    sign = pg.sign_function(z).real[0]
    assert raw == 0.0 or np.sign(raw) == np.sign(sign)
    assert sign < 0


def test_sum_rejects_point_masses():
    delta = PolyGaussian(1, 0.0, [[0, 0]], [1.0], (0.0,))
    with pytest.raises(ValueError):
        PolyGaussianSum((delta,))


def test_fallback_selected_by_environment():
    import json
    import os
    import subprocess
    import sys

    code = ("import json, nonclassical; from nonclassical.depth import depth; "
            "from nonclassical.states import fock; "
            "print(json.dumps([nonclassical.BACKEND, depth(fock(1)).tau_m]))")
    env = dict(os.environ, NONCLASSICAL_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, tau_m = json.loads(out.stdout)
    assert backend == "python"
    assert tau_m == pytest.approx(1.0, abs=1e-3)
