import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mpoforge import expfit

rates = st.floats(min_value=-0.95, max_value=0.95).filter(lambda x: abs(x) > 0.05)
amps = st.floats(min_value=-3.0, max_value=3.0).filter(lambda x: abs(x) > 0.1)


@given(rates, rates, amps, amps, st.sampled_from(["qr", "direct"]))
def test_exact_recovery_of_two_exponentials(l1, l2, x1, x2, method):
    if abs(l1 - l2) < 0.05:
        l2 = -l1 if abs(l1) > 0.1 else 0.5
    k = np.arange(1, 121)
    f = x1 * l1**k + x2 * l2**k
    fit = expfit.fit(f, 2, method)
    assert fit.cost <= 1e-9 * max(1.0, np.sum(np.abs(f)))
    assert np.allclose(sorted(fit.exponents.real), sorted([l1, l2]), atol=1e-6)


def test_complex_pair_recovery():
    k = np.arange(1, 201)
    lam = 0.8 * np.exp(0.4j)
    f = np.real(2.0 * lam**k)
    fit = expfit.fit(f, 2)
    assert fit.cost < 1e-10
    assert np.isrealobj(expfit.evaluate(fit, k))
    assert np.isclose(abs(fit.exponents[0]), 0.8)


def test_hankel_layout():
    f = np.arange(1.0, 7.0)
    h = expfit.build_hankel(f, 3)
    assert h.shape == (4, 3)
    assert np.array_equal(h[1], [2.0, 3.0, 4.0])


@pytest.mark.parametrize("p, limit", [(1, 1e-3), (2, 1e-5), (3, 1e-7)])
def test_power_law_fit_quality(p, limit):
    fit = expfit.fit_power_law(p, 10, 1000)
    assert fit.n_terms == 10
    assert fit.max_dev <= limit
    assert not fit.unstable


def test_methods_agree_on_power_law():
    a = expfit.fit_power_law(3, 6, 400, "qr")
    b = expfit.fit_power_law(3, 6, 400, "direct")
    assert abs(a.max_dev - b.max_dev) < 1e-6


def test_rank_collapse_reported():
    k = np.arange(1, 60)
    fit = expfit.fit(0.5**k, 4)
    assert any("rank collapse" in d for d in fit.diagnostics)
    assert fit.cost < 1e-12


def test_duplicate_exponents_are_merged():
    f = 0.7 ** np.arange(1, 30)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", expfit.FitWarning)
        lam, w, diags = expfit.fit_weights(f, [0.7, 0.7])
    assert len(lam) == 1 and np.isclose(w[0], 1.0)
    assert any("duplicate" in d for d in diags)


def test_growing_exponent_flags_unstable():
    k = np.arange(1, 40)
    fit = expfit.fit(1.05**k, 1)
    assert fit.unstable


def test_argument_checks():
    with pytest.raises(ValueError):
        expfit.fit(np.ones(5), 4)
    with pytest.raises(ValueError):
        expfit.fit(np.ones(50), 2, "svd")


def test_read_samples_csv(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("k,f\n1,0.5\n2,0.25\n3,0.125\n4,0.0625\n")
    f = expfit.read_samples_csv(path)
    assert np.allclose(f, 0.5 ** np.arange(1, 5))
    assert expfit.fit(f, 1).cost < 1e-14
