import numpy as np
import pytest
import scipy.linalg as sla

from cfarmismatch.matkit import (
    NotPositiveDefiniteError,
    chol,
    chol_stack,
    heig,
    hermitian_part,
    hermitian_sqrt,
    ortho_complement,
    solve_hpd,
    solve_lower,
    solve_lower_stack,
)


def test_chol_identity_is_identity():
    assert np.array_equal(chol(np.eye(4, dtype=complex)), np.eye(4, dtype=complex))


def test_chol_of_scaled_identity():
    assert np.array_equal(chol(4.0 * np.eye(3, dtype=complex)), 2.0 * np.eye(3, dtype=complex))


def test_chol_reconstructs_input(rand_hpd):
    a = rand_hpd(6, seed=10)
    l = chol(a)
    rel = np.linalg.norm(l @ l.conj().T - a) / np.linalg.norm(a)
    assert rel < 1e-12
    assert np.abs(np.triu(l, 1)).max() == 0.0


def test_chol_matches_scipy(rand_hpd):
    a = rand_hpd(5, seed=11)
    assert np.abs(chol(a) - sla.cholesky(a, lower=True)).max() < 1e-13


def test_chol_rejects_indefinite_with_pivot():
    a = np.diag([1.0, -1.0, 2.0]).astype(complex)
    with pytest.raises(NotPositiveDefiniteError) as exc:
        chol(a)
    assert exc.value.pivot == 2


def test_chol_rejects_non_hermitian():
    a = np.eye(3, dtype=complex)
    a[0, 1] = 1.0
    with pytest.raises(ValueError):
        chol(a)


def test_not_positive_definite_is_a_value_error():
    assert issubclass(NotPositiveDefiniteError, ValueError)


def test_hermitian_part_symmetrizes():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = hermitian_part(a)
    assert np.abs(h - h.conj().T).max() == 0.0


def test_heig_identity():
    pair = heig(np.eye(4, dtype=complex))
    assert np.abs(pair.values - 1.0).max() < 1e-14


def test_heig_orders_descending():
    pair = heig(np.diag([3.0, 1.0]).astype(complex))
    assert np.allclose(pair.values, [3.0, 1.0])
    a = np.diag([5.0, 2.0, 9.0, 1.0]).astype(complex)
    vals = heig(a).values
    assert (np.diff(vals) <= 0).all()


def test_heig_trace_identity(rand_hpd):
    a = rand_hpd(7, seed=12)
    pair = heig(a)
    assert abs(pair.values.sum() - np.trace(a).real) < 1e-10 * abs(np.trace(a).real)


def test_heig_reconstructs(rand_hpd):
    a = rand_hpd(5, seed=13)
    pair = heig(a)
    back = pair.vectors @ np.diag(pair.values) @ pair.vectors.conj().T
    assert np.abs(back - a).max() < 1e-12


def test_hermitian_sqrt_squares_back(rand_hpd):
    a = rand_hpd(6, seed=14)
    s = hermitian_sqrt(a)
    assert np.abs(s @ s.conj().T - a).max() < 1e-12
    assert np.abs(s - s.conj().T).max() < 1e-12


def test_ortho_complement_canonical_axis():
    n = 5
    e_last = np.zeros(n, dtype=complex)
    e_last[-1] = 1.0
    vp = ortho_complement(e_last)
    assert np.array_equal(vp, np.eye(n, dtype=complex)[:, : n - 1])


def test_ortho_complement_annihilates_v():
    rng = np.random.default_rng(1)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    v /= np.linalg.norm(v)
    vp = ortho_complement(v)
    assert np.abs(vp.conj().T @ v).max() < 1e-12


def test_ortho_complement_extends_to_unitary():
    rng = np.random.default_rng(2)
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    v /= np.linalg.norm(v)
    q = np.column_stack([ortho_complement(v), v])
    assert np.abs(q.conj().T @ q - np.eye(6)).max() < 1e-12


def test_ortho_complement_requires_unit_norm():
    with pytest.raises(ValueError):
        ortho_complement(np.array([2.0, 0.0], dtype=complex))


def test_solve_hpd_identity_and_scaling():
    b = np.arange(6, dtype=complex).reshape(3, 2) + 1j
    assert np.abs(solve_hpd(np.eye(3, dtype=complex), b) - b).max() < 1e-14
    assert np.abs(solve_hpd(2.0 * np.eye(3, dtype=complex), b) - b / 2.0).max() < 1e-14


def test_solve_hpd_residual(rand_hpd):
    a = rand_hpd(6, seed=15)
    rng = np.random.default_rng(16)
    b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    x = solve_hpd(a, b)
    assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-10


def test_solve_lower_matches_scipy(rand_hpd):
    l = chol(rand_hpd(5, seed=17))
    rng = np.random.default_rng(18)
    b = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    assert np.abs(solve_lower(l, b) - sla.solve_triangular(l, b, lower=True)).max() < 1e-13


def test_chol_stack_matches_per_matrix(rand_hpd):
    mats = np.stack([rand_hpd(4, seed=20 + i) for i in range(6)])
    ls = chol_stack(mats)
    for i in range(6):
        assert np.abs(ls[i] - chol(mats[i])).max() < 1e-13


def test_chol_stack_rejects_indefinite_batch(rand_hpd):
    mats = np.stack([rand_hpd(3, seed=30), -np.eye(3, dtype=complex)])
    with pytest.raises(NotPositiveDefiniteError):
        chol_stack(mats)


def test_solve_lower_stack_matches_loop(rand_hpd):
    rng = np.random.default_rng(31)
    mats = np.stack([rand_hpd(4, seed=40 + i) for i in range(5)])
    ls = chol_stack(mats)
    b = rng.standard_normal((5, 4, 2)) + 1j * rng.standard_normal((5, 4, 2))
    out = solve_lower_stack(ls, b)
    for i in range(5):
        ref = sla.solve_triangular(ls[i], b[i], lower=True)
        assert np.abs(out[i] - ref).max() < 1e-12
