"""Training-covariance mismatch families and the rotation geometry they induce.

Five ways of generating a training covariance from the test-cell covariance:
exact match, an inverse-Wishart perturbation, eigenvalue jitter, and one
variant of each that enforces the eigenrelation inv(St) v = lam * inv(S) v
(so the whitened cross block vanishes). ``omega_decompose`` extracts the
geometry (eigenvalues, cross row, Schur complement) that drives the fast
pair sampler.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matkit import (
    chol,
    check_hermitian,
    heig,
    hermitian_part,
    hermitian_sqrt,
    ortho_complement,
    solve_hpd,
    solve_lower,
)
from .randkit import _generator, sample_cwishart

VARIANTS = ("identity", "inv_wishart", "eig_jitter", "ger_chol", "ger_eig")


@dataclass(frozen=True)
class MismatchSpec:
    """How the training covariance is generated from the test-cell one.

    ``delta_db`` is the half-width of every uniform dB draw. Degrees of
    freedom default to 2N when left unset. ``pin_psi22`` fixes the scalar
    block of the ger_chol construction instead of drawing it (that scalar
    equals the induced Schur complement, so pinning it to 1 keeps the
    whitened gain ratio at unity).
    """

    variant: str
    delta_db: float = 6.0
    nu: int | None = None
    nu1: int | None = None
    m2: int | None = None
    pin_psi22: float | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown mismatch variant {self.variant!r}; expected one of {VARIANTS}")
        if self.delta_db < 0:
            raise ValueError(f"delta_db must be >= 0, got {self.delta_db}")
        if self.m2 is not None and self.m2 < 2:
            raise ValueError(f"m2 must be >= 2 for the scalar block mean to exist, got {self.m2}")
        if self.pin_psi22 is not None and self.pin_psi22 <= 0:
            raise ValueError("pin_psi22 must be positive")


@dataclass(frozen=True)
class GerReport:
    """Collinearity of inv(St) v with inv(S) v: relative residual and scalar."""

    residual: float
    lambda_ger: float
    holds: bool


@dataclass(frozen=True)
class OmegaSummary:
    """Whitened-and-rotated geometry of a (sigma, sigma_t) pair.

    ``lam`` are the descending eigenvalues of the leading (N-1) block,
    ``w`` the row mapping the leading whitened coordinates into the test
    coordinate (scalar contribution = w @ x1, plain dot), ``schur`` the
    Schur complement of that block, and ``ratio`` the same quantity
    recomputed independently as v^H inv(St) v / v^H inv(S) v.
    """

    lam: np.ndarray
    omega11: np.ndarray
    omega11_factor: np.ndarray
    w: np.ndarray
    schur: float
    vt_quad: float
    ratio: float


def _db_uniform(rng: np.random.Generator, half_width_db: float, size: int | None = None):
    return 10.0 ** (rng.uniform(-half_width_db, half_width_db, size=size) / 10.0)


def _right_div_conj(a: np.ndarray, m: np.ndarray) -> np.ndarray:
    """X with X @ m^H = a, for any nonsingular m."""
    return np.linalg.solve(m.conj(), a.T).T


def gen_sigma_t(stream, sigma: np.ndarray, v: np.ndarray, spec: MismatchSpec) -> tuple[np.ndarray, dict]:
    """Draw one training covariance under ``spec``; returns it plus the drawn scalars."""
    sigma = check_hermitian(sigma, what="sigma")
    n = sigma.shape[0]
    rng = _generator(stream)

    if spec.variant == "identity":
        return sigma.copy(), {}

    if spec.variant == "inv_wishart":
        nu = spec.nu if spec.nu is not None else 2 * n
        if nu <= n:
            raise ValueError(f"inv_wishart needs nu > N, got nu={nu}, N={n}")
        gamma = float(_db_uniform(rng, spec.delta_db))
        mu = gamma * (nu - n)  # E[inv(Wt)] = gamma * I
        wt = sample_cwishart(rng, n, nu, np.eye(n, dtype=np.complex128) / np.sqrt(mu))
        t = solve_lower(chol(wt), chol(sigma).conj().T)
        return hermitian_part(t.conj().T @ t), {"gamma": gamma}

    if spec.variant == "eig_jitter":
        e = heig(sigma)
        gamma_n = _db_uniform(rng, spec.delta_db, size=n)  # paired with descending eigenvalues
        sigma_t = (e.vectors * (e.values * gamma_n)) @ e.vectors.conj().T
        return hermitian_part(sigma_t), {"gamma_n": gamma_n}

    if spec.variant == "ger_chol":
        nu1 = spec.nu1 if spec.nu1 is not None else 2 * n
        m2 = spec.m2 if spec.m2 is not None else 2 * n
        if nu1 <= n - 1:
            raise ValueError(f"ger_chol needs nu1 > N-1, got nu1={nu1}, N={n}")
        vu = v / np.linalg.norm(v)
        vperp = ortho_complement(vu)
        qv = np.hstack([vperp, vu[:, None]])
        c = chol(hermitian_part(qv.conj().T @ sigma @ qv))
        gamma = float(_db_uniform(rng, spec.delta_db))
        # E[inv(Psi11)] = gamma * I and E[1/psi22] = gamma.
        scale = np.eye(n - 1, dtype=np.complex128) / np.sqrt(gamma * (nu1 - n + 1))
        psi11 = sample_cwishart(rng, n - 1, nu1, scale)
        if spec.pin_psi22 is not None:
            psi22 = float(spec.pin_psi22)
        else:
            psi22 = float(rng.gamma(m2, 1.0) / (gamma * (m2 - 1)))
        t = solve_lower(chol(psi11), np.eye(n - 1, dtype=np.complex128))
        inv11 = hermitian_part(t.conj().T @ t)
        blk = np.zeros((n, n), dtype=np.complex128)
        blk[: n - 1, : n - 1] = inv11
        blk[n - 1, n - 1] = 1.0 / psi22
        sigma_t = qv @ (c @ blk @ c.conj().T) @ qv.conj().T
        return hermitian_part(sigma_t), {"gamma": gamma, "psi22": psi22}

    if spec.variant == "ger_eig":
        e = heig(sigma)
        vperp = ortho_complement(v / np.linalg.norm(v))
        f = chol(hermitian_part(vperp.conj().T @ sigma @ vperp))
        lam_sqrt = np.sqrt(e.values)
        block = _right_div_conj(lam_sqrt[:, None] * (e.vectors.conj().T @ vperp), f)
        y = (e.vectors.conj().T @ v) / lam_sqrt
        basis = np.hstack([block, (y / np.linalg.norm(y))[:, None]])
        l1 = _db_uniform(rng, spec.delta_db, size=n - 1)
        l2 = float(_db_uniform(rng, spec.delta_db))
        wt = (basis / np.concatenate([l1, [l2]])[None, :]) @ basis.conj().T
        uls = e.vectors * lam_sqrt[None, :]
        return hermitian_part(uls @ wt @ uls.conj().T), {"l1": l1, "l2": l2}

    raise AssertionError(f"unhandled variant {spec.variant!r}")


def check_ger(sigma: np.ndarray, sigma_t: np.ndarray, v: np.ndarray, tol: float = 1e-8) -> GerReport:
    """Measure how collinear inv(St) v is with inv(S) v."""
    a = solve_hpd(sigma_t, v)
    b = solve_hpd(sigma, v)
    coef = np.vdot(b, a) / np.vdot(b, b)
    residual = float(np.linalg.norm(a - coef * b) / np.linalg.norm(a))
    return GerReport(residual=residual, lambda_ger=float(coef.real), holds=residual < tol)


def omega_decompose(
    sigma: np.ndarray,
    sigma_t: np.ndarray,
    v: np.ndarray,
    sqrt_method: str = "chol",
) -> OmegaSummary:
    """Whiten by the training covariance, rotate v onto the last axis, partition.

    ``sqrt_method`` selects the square root used for the whitening factors
    ("chol" or "hermitian"); rotation-invariant outputs (sorted eigenvalues,
    row norm, Schur complement) do not depend on the choice.
    """
    sigma = check_hermitian(sigma, what="sigma")
    sigma_t = check_hermitian(sigma_t, what="sigma_t")
    n = sigma.shape[0]
    factors = {"chol": chol, "hermitian": hermitian_sqrt}
    if sqrt_method not in factors:
        raise ValueError(f"sqrt_method must be one of {tuple(factors)}, got {sqrt_method!r}")
    factor = factors[sqrt_method]

    vperp = ortho_complement(v / np.linalg.norm(v))
    gt = factor(sigma_t)
    ft = factor(hermitian_part(vperp.conj().T @ sigma_t @ vperp))
    # Unitary Q = [Gt^H Vperp Ft^-H, Gt^-1 v / ||Gt^-1 v||]: sends the
    # whitened steering vector onto the last canonical axis.
    left = _right_div_conj(gt.conj().T @ vperp, ft)
    y = np.linalg.solve(gt, v)
    vt_quad = float(np.vdot(y, y).real)
    q = np.hstack([left, (y / np.sqrt(vt_quad))[:, None]])
    gram_err = np.linalg.norm(q.conj().T @ q - np.eye(n))
    if gram_err > 1e-8:
        raise RuntimeError(f"rotation lost unitarity (residual {gram_err:.3e}); construction bug")

    m = np.linalg.solve(gt, np.linalg.solve(gt, sigma).conj().T)
    omega = hermitian_part(q.conj().T @ m @ q)

    omega11 = omega[: n - 1, : n - 1]
    omega12 = omega[: n - 1, n - 1]
    lam = heig(omega11).values
    if np.any(lam <= 0):
        raise RuntimeError("leading block lost positive definiteness")
    w = solve_hpd(omega11, omega12).conj()  # row convention: scalar = w @ x1
    schur = float((omega[n - 1, n - 1] - w @ omega12).real)

    ratio = vt_quad / float(np.vdot(v, solve_hpd(sigma, v)).real)
    if abs(schur - ratio) > 1e-6 * ratio:
        raise RuntimeError(
            f"Schur complement {schur!r} disagrees with quadratic-form ratio {ratio!r}"
        )
    return OmegaSummary(
        lam=lam,
        omega11=omega11,
        omega11_factor=chol(omega11),
        w=w,
        schur=schur,
        vt_quad=vt_quad,
        ratio=ratio,
    )
