import numpy as np
import pytest
from scipy import stats as sstats

from cfarmismatch.randkit import (
    GENERATOR_ID,
    StreamKey,
    beta_cdf,
    cf1_survival,
    sample_cF,
    sample_cchi2,
    sample_cnormal,
    sample_cwishart,
    standard_circular,
    wilson_ci,
)


def test_stream_key_is_reproducible():
    a = StreamKey(7).child(1, 2).generator().uniform(size=8)
    b = StreamKey(7).child(1, 2).generator().uniform(size=8)
    assert np.array_equal(a, b)


def test_stream_key_children_are_distinct():
    root = StreamKey(7)
    a = root.child(0).generator().uniform(size=8)
    b = root.child(1).generator().uniform(size=8)
    c = root.child(0, 0).generator().uniform(size=8)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_key_seed_is_masked_to_64_bits():
    a = StreamKey(2**64 + 5).generator().uniform(size=4)
    b = StreamKey(5).generator().uniform(size=4)
    assert np.array_equal(a, b)


def test_stream_key_rejects_negative_path():
    with pytest.raises(ValueError):
        StreamKey(1).child(-3)


def test_generator_id_names_the_numpy_build():
    assert np.__version__ in GENERATOR_ID


def test_standard_circular_unit_power():
    u = standard_circular(StreamKey(11).generator(), (100_000,))
    power = float(np.mean(np.abs(u) ** 2))
    assert 0.98 <= power <= 1.02


def test_cnormal_zero_mean_case():
    z = sample_cnormal(StreamKey(12), np.zeros(4, dtype=complex), np.eye(4, dtype=complex),
                       size=100_000)
    assert np.linalg.norm(z.mean(axis=0)) < 0.02


def test_cnormal_covariance_matches_factor(rand_hpd):
    a = rand_hpd(3, seed=3)
    g = np.linalg.cholesky(a)
    z = sample_cnormal(StreamKey(13), np.zeros(3, dtype=complex), g, size=100_000)
    cov = np.einsum("mi,mj->ij", z, z.conj()) / z.shape[0]
    scale = np.abs(np.diag(a)).max()
    assert np.abs(cov - a).max() < 0.05 * scale


def test_cnormal_applies_mean_offset():
    mean = np.array([1.0 + 2.0j, -0.5j, 3.0], dtype=complex)
    z = sample_cnormal(StreamKey(14), mean, np.eye(3, dtype=complex), size=50_000)
    assert np.linalg.norm(z.mean(axis=0) - mean) < 0.03


def test_cnormal_rejects_bad_factor_shape():
    with pytest.raises(ValueError):
        sample_cnormal(StreamKey(1), np.zeros(3, dtype=complex),
                       np.eye(2, dtype=complex), size=4)


def test_cwishart_mean_is_dof_times_scale():
    acc = np.zeros((4, 4), dtype=complex)
    root = StreamKey(15)
    n_draws = 10_000
    for i in range(n_draws):
        acc += sample_cwishart(root.child(i), 4, 16, np.eye(4, dtype=complex))
    mean = acc / n_draws
    assert np.abs(mean - 16 * np.eye(4)).max() < 0.05 * 16


def test_cwishart_scalar_case_is_gamma():
    root = StreamKey(16)
    draws = np.array([sample_cwishart(root.child(i), 1, 8, np.eye(1, dtype=complex))[0, 0].real
                      for i in range(10_000)])
    d = sstats.kstest(draws, sstats.gamma(8).cdf).statistic
    assert d < 0.02


def test_cwishart_output_is_hermitian_positive():
    w = sample_cwishart(StreamKey(17), 5, 12, np.eye(5, dtype=complex))
    assert np.abs(w - w.conj().T).max() < 1e-12
    assert np.linalg.eigvalsh(w).min() > 0


def test_cwishart_rejects_singular_dof():
    with pytest.raises(ValueError):
        sample_cwishart(StreamKey(1), 4, 3, np.eye(4, dtype=complex))


def test_cchi2_central_mean():
    draws = sample_cchi2(StreamKey(18), 17, size=100_000)
    assert abs(float(draws.mean()) - 17.0) < 0.15


def test_cchi2_noncentral_mean_unit_p():
    draws = sample_cchi2(StreamKey(19), 1, delta=4.0, size=100_000)
    assert abs(float(draws.mean()) - 5.0) < 0.1


def test_cchi2_unit_p_central_is_exponential():
    draws = sample_cchi2(StreamKey(20), 1, size=100_000)
    d = sstats.kstest(draws, sstats.expon.cdf).statistic
    assert d < 0.01


def test_cchi2_accepts_array_noncentrality():
    delta = np.array([0.0, 1.0, 4.0, 9.0])
    draws = sample_cchi2(StreamKey(21), 2, delta=delta, size=4)
    assert draws.shape == (4,)
    assert (draws > 0).all()


@pytest.mark.parametrize("p,delta", [(0, 0.0), (-1, 0.0), (2, -0.5)])
def test_cchi2_rejects_bad_parameters(p, delta):
    with pytest.raises(ValueError):
        sample_cchi2(StreamKey(1), p, delta=delta, size=2)


def test_cf_survival_matches_closed_form():
    draws = sample_cF(StreamKey(22), 1, 17, size=1_000_000)
    for t in (0.2, 0.5, 1.0):
        target = cf1_survival(t, 17)
        emp = float(np.mean(draws > t))
        sigma_mc = np.sqrt(target * (1.0 - target) / draws.size)
        assert abs(emp - target) < 3.0 * sigma_mc


def test_cf_mean_matches_moment_formula():
    draws = sample_cF(StreamKey(23), 1, 17, size=100_000)
    assert abs(float(draws.mean()) - 1.0 / 16.0) < 0.003


def test_cf_is_right_skewed_at_large_q():
    draws = sample_cF(StreamKey(24), 1, 64, size=10_000)
    assert float(np.median(draws)) < float(draws.mean())


def test_cf_noncentrality_raises_the_mean():
    central = sample_cF(StreamKey(25).child(0), 1, 17, size=50_000)
    shifted = sample_cF(StreamKey(25).child(1), 1, 17, delta=4.0, size=50_000)
    assert float(shifted.mean()) > float(central.mean()) + 0.1


def test_cf1_survival_values():
    assert cf1_survival(0.0, 17) == 1.0
    assert abs(cf1_survival(1.0, 2) - 0.25) < 1e-15
    eta = 10.0 ** (3.0 / 17.0) - 1.0
    assert abs(cf1_survival(eta, 17) - 1e-3) < 1e-15
    ts = np.linspace(0.0, 3.0, 7)
    vals = cf1_survival(ts, 17)
    assert (np.diff(vals) < 0).all()


def test_beta_cdf_endpoints_and_uniform():
    assert beta_cdf(2.5, 3.5, 0.0) == 0.0
    assert beta_cdf(2.5, 3.5, 1.0) == 1.0
    x = np.linspace(0.0, 1.0, 11)
    assert np.abs(beta_cdf(1.0, 1.0, x) - x).max() < 1e-14
    assert np.abs(beta_cdf(2.0, 1.0, x) - x**2).max() < 1e-14


def test_wilson_ci_zero_count_upper_bound():
    lo, hi = wilson_ci(0, 10**6)
    assert lo == 0.0
    assert hi < 5e-6


@pytest.mark.parametrize("k,n", [(0, 100), (5, 100), (500, 1000), (999, 1000), (1000, 1000)])
def test_wilson_ci_matches_reference_implementation(k, n):
    ref = sstats.binomtest(k, n).proportion_ci(confidence_level=0.95, method="wilson")
    lo, hi = wilson_ci(k, n)
    assert abs(lo - ref.low) < 1e-12
    assert abs(hi - ref.high) < 1e-12
    assert lo <= k / n <= hi
