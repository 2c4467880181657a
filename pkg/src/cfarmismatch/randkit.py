"""Reproducible sampling of the complex-valued distributions used throughout.

Conventions (fixed once, everything downstream assumes them):

* standard circular complex scalar u: real and imaginary parts are
  independent N(0, 1/2), so E|u|^2 = 1;
* Cchi2(p, 0) is Gamma(shape=p, scale=1), no factor 2;
* the noncentral Cchi2 is sampled by the shifted-Gaussian construction
  |CN(sqrt(delta), 1)|^2 + Gamma(p-1, 1), exact and branch-free.

Streams are counter-based: a (seed, path) pair is hashed to a Philox key,
so identical keys replay identical sequences and distinct paths are
statistically independent regardless of worker count or draw order.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

_MASK64 = (1 << 64) - 1

# Pinned into result-file metadata; bump the tag if stream derivation changes.
GENERATOR_ID = f"philox4x64(sha256 seed/path)/numpy-{np.__version__}"


@dataclass(frozen=True)
class StreamKey:
    """Identity of one random stream: a seed plus a path of integer labels.

    Identical (seed, path) pairs reproduce the same draw sequence; distinct
    paths under one seed give independent streams. A single key must not be
    shared across concurrent workers; derive children instead.
    """

    seed: int
    path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        path = tuple(int(p) for p in self.path)
        if any(p < 0 for p in path):
            raise ValueError(f"stream path labels must be non-negative, got {path}")
        object.__setattr__(self, "path", path)

    def child(self, *labels: int) -> "StreamKey":
        """Derive a sub-stream by appending labels to the path."""
        return StreamKey(self.seed, self.path + tuple(labels))

    def generator(self) -> np.random.Generator:
        """Fresh Philox generator keyed by a hash of (seed, path)."""
        h = hashlib.sha256(b"cfarmismatch.stream.v1")
        h.update(struct.pack("<Q", self.seed))
        for label in self.path:
            h.update(struct.pack("<Q", label))
        key = int.from_bytes(h.digest()[:16], "little")
        return np.random.Generator(np.random.Philox(key=key))


def _generator(stream) -> np.random.Generator:
    if isinstance(stream, StreamKey):
        return stream.generator()
    if isinstance(stream, np.random.Generator):
        return stream
    raise TypeError(f"expected StreamKey or Generator, got {type(stream).__name__}")


def standard_circular(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. standard circular complex entries, E|u|^2 = 1 per entry."""
    z = rng.standard_normal(tuple(np.atleast_1d(shape)) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def sample_cnormal(stream, mean: np.ndarray, cov_factor: np.ndarray, size: int | None = None) -> np.ndarray:
    """Draw from CN(mean, G G^H) as mean + G u, G lower-triangular.

    With ``size`` given, returns a (size, n) stack of independent draws.
    """
    rng = _generator(stream)
    mean = np.asarray(mean, dtype=np.complex128)
    g = np.asarray(cov_factor, dtype=np.complex128)
    n = mean.shape[0]
    if g.shape != (n, n):
        raise ValueError(f"cov_factor shape {g.shape} does not match mean length {n}")
    if np.any(np.abs(np.triu(g, 1)) > 0) or np.any(g.real[np.diag_indices(n)] <= 0):
        raise ValueError("cov_factor must be lower-triangular with positive diagonal")
    if size is None:
        u = standard_circular(rng, (n,))
        return mean + g @ u
    u = standard_circular(rng, (size, n))
    return mean[None, :] + u @ g.T


def sample_cwishart(stream, n: int, dof: int, scale_factor: np.ndarray) -> np.ndarray:
    """Draw from the complex Wishart CW(dof, G G^H) as G (Z Z^H) G^H.

    Z is n x dof with standard circular entries; dof >= n keeps the result
    nonsingular with probability 1.
    """
    if dof < n:
        raise ValueError(f"Wishart dof {dof} < dimension {n}: sample would be singular")
    rng = _generator(stream)
    g = np.asarray(scale_factor, dtype=np.complex128)
    if g.shape != (n, n):
        raise ValueError(f"scale_factor shape {g.shape} does not match dimension {n}")
    z = standard_circular(rng, (n, dof))
    m = g @ z
    w = m @ m.conj().T
    return 0.5 * (w + w.conj().T)


def sample_cchi2(stream, p: int, delta=0.0, size: int | None = None) -> np.ndarray | float:
    """Complex chi-square with p degrees of freedom, noncentrality delta.

    Central draws are Gamma(p, 1); noncentral uses
    |CN(sqrt(delta), 1)|^2 + Gamma(p-1, 1). ``delta`` may be an array
    (broadcast against ``size``).
    """
    if p < 1:
        raise ValueError(f"dof p must be >= 1, got {p}")
    delta = np.asarray(delta, dtype=float)
    if np.any(delta < 0):
        raise ValueError("noncentrality delta must be >= 0")
    rng = _generator(stream)
    shape = () if size is None else (size,)
    if delta.ndim == 0 and delta == 0.0:
        out = rng.gamma(p, 1.0, size=shape or None)
        return float(out) if size is None else out
    z = standard_circular(rng, shape if shape else (1,))
    z = z.reshape(shape) if shape else z[0]
    head = np.abs(np.sqrt(delta) + z) ** 2
    if p > 1:
        head = head + rng.gamma(p - 1, 1.0, size=shape or None)
    return float(head) if size is None else np.asarray(head)


def sample_cF(stream, p: int, q: int, delta=0.0, size: int | None = None) -> np.ndarray | float:
    """Complex F variate: ratio of independent Cchi2(p, delta) and Cchi2(q, 0).

    No degrees-of-freedom normalization is applied to the ratio.
    """
    if q < 1:
        raise ValueError(f"dof q must be >= 1, got {q}")
    rng = _generator(stream)
    num = sample_cchi2(rng, p, delta, size=size)
    den = sample_cchi2(rng, q, 0.0, size=size)
    return num / den


def cf1_survival(t, q: int):
    """P(F > t) for the central complex F with p=1: (1 + t)^(-q).

    Closed form from E[exp(-t V)] with exponential numerator and
    Gamma(q, 1) denominator; strictly decreasing in t.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    if q < 1:
        raise ValueError(f"dof q must be >= 1, got {q}")
    out = (1.0 + t) ** (-float(q))
    return float(out) if out.ndim == 0 else out


def beta_cdf(a: float, b: float, x):
    """Regularized incomplete beta I_x(a, b), the Beta(a, b) CDF."""
    if a <= 0 or b <= 0:
        raise ValueError(f"beta parameters must be positive, got a={a}, b={b}")
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    out = special.betainc(a, b, x)
    return float(out) if out.ndim == 0 else out


def wilson_ci(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for k successes in n Bernoulli trials."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0 < level < 1:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    z = stats.norm.ppf(0.5 + level / 2.0)
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    # At the boundary counts center-half rounds to a tiny positive number,
    # which would put the interval strictly above p_hat = 0; pin it instead.
    lo = 0.0 if k == 0 else max(0.0, float(center - half))
    hi = 1.0 if k == n else min(1.0, float(center + half))
    return lo, hi
