"""Backend equivalence and selection for the numeric kernels."""

import numpy as np
import pytest

from tailmix import kernels
from tailmix.errors import DomainError
from tailmix.seeding import substream


def both(name):
    if "numba" not in kernels.IMPLEMENTATIONS:
        pytest.skip("numba backend unavailable")
    return kernels.IMPLEMENTATIONS["numpy"][name], kernels.IMPLEMENTATIONS["numba"][name]


def test_zeta_backends_agree_across_grid():
    f_np, f_nb = both("zeta_pair")
    for alpha in (1.05, 1.2, 1.5, 2.0, 2.7, 3.3, 3.9):
        for q in (1.0, 2.0, 5.0):
            z0, d0 = f_np(alpha, q)
            z1, d1 = f_nb(alpha, q)
            assert z0 == pytest.approx(z1, rel=1e-12)
            assert d0 == pytest.approx(d1, rel=1e-12)


def test_mix_loglik_backends_agree_on_random_inputs():
    f_np, f_nb = both("mix_loglik_grad")
    rng = substream(321)
    for n_exp in (0, 1, 2):
        for literal in (False, True):
            values = np.unique(rng.integers(1, 500, size=200)).astype(np.float64)
            mult = rng.integers(1, 30, size=values.size).astype(np.float64)
            raw = rng.uniform(0.2, 1.0, size=n_exp + 1)
            m = raw / raw.sum()
            lam = np.sort(rng.uniform(0.05, 3.0, size=n_exp))[::-1].copy()
            alpha = float(rng.uniform(1.1, 3.5))
            z, dz = kernels.IMPLEMENTATIONS["numpy"]["zeta_pair"](alpha, 1.0)
            out0 = f_np(values, np.log(values), mult, m, lam, alpha, 1.0, z, dz, literal)
            out1 = f_nb(values, np.log(values), mult, m, lam, alpha, 1.0, z, dz, literal)
            assert out0[0] == pytest.approx(out1[0], rel=1e-12)
            np.testing.assert_allclose(out0[1], out1[1], rtol=1e-10)
            np.testing.assert_allclose(out0[2], out1[2], rtol=1e-10)
            assert out0[3] == pytest.approx(out1[3], rel=1e-10)


def test_literal_mode_matches_direct_formula():
    f = kernels.IMPLEMENTATIONS["numpy"]["mix_loglik_grad"]
    values = np.array([1.0, 2.0, 7.0])
    mult = np.ones(3)
    m = np.array([0.6, 0.4])
    lam = np.array([0.5])
    z, dz = kernels.IMPLEMENTATIONS["numpy"]["zeta_pair"](2.0, 1.0)
    ll, _, _, _ = f(values, np.log(values), mult, m, lam, 2.0, 1.0, z, dz, True)
    direct = np.log(
        0.6 * 0.5 * np.exp(-0.5 * values) + 0.4 * values**-2.0 / z
    ).sum()
    assert ll == pytest.approx(direct, rel=1e-12)


def test_resolve_backend_names():
    assert kernels.resolve_backend("numpy") == "numpy"
    assert kernels.resolve_backend(" NumPy ") == "numpy"
    with pytest.raises(DomainError):
        kernels.resolve_backend("fortran")


def test_resolve_backend_falls_back_without_numba(monkeypatch):
    monkeypatch.setattr(kernels, "HAVE_NUMBA", False)
    with pytest.warns(RuntimeWarning):
        assert kernels.resolve_backend("numba") == "numpy"


def test_active_backend_is_consistent():
    assert kernels.ACTIVE_BACKEND in kernels.IMPLEMENTATIONS
    assert kernels.zeta_pair is kernels.IMPLEMENTATIONS[kernels.ACTIVE_BACKEND]["zeta_pair"]
