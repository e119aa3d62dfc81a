"""First-order oracle abstraction with optional inexactness.

An oracle is any callable ``x -> OracleResponse``.  ``FunctionOracle`` wraps a
(value, subgradient) pair of callables, ``LinearOracle`` and
``AbsLinearOracle`` cover the linear pieces used by the problem generators, and
``InexactOracle`` produces delta-subgradients from an exact oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class OracleResponse:
    value: float
    subgradient: np.ndarray
    delta: float = 0.0
    active_index: int | None = None


class FunctionOracle:
    def __init__(self, value_fn, subgrad_fn):
        self._value = value_fn
        self._subgrad = subgrad_fn

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return OracleResponse(float(self._value(x)), np.asarray(self._subgrad(x), dtype=float))


class LinearOracle:
    """g(x) = <a, x> + b."""

    def __init__(self, a, b=0.0):
        self.a = np.asarray(a, dtype=float)
        self.b = float(b)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return OracleResponse(float(self.a @ x + self.b), self.a.copy())


class AbsLinearOracle:
    """g(x) = |<a, x>| + b, subgradient sign(<a,x>)*a with sign(0) = 0."""

    def __init__(self, a, b=0.0):
        self.a = np.asarray(a, dtype=float)
        self.b = float(b)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = float(self.a @ x)
        sign = 0.0 if t == 0.0 else (1.0 if t > 0 else -1.0)
        return OracleResponse(abs(t) + self.b, sign * self.a)


class InexactOracle:
    """delta-subgradient oracle built from an exact one.

    The value is perturbed by a seeded amount bounded by delta and the
    subgradient is taken at a point within ``delta / lipschitz`` of x, which
    keeps the delta-subgradient inequality testable.
    """

    def __init__(self, exact, delta, lipschitz, seed=0):
        if delta < 0:
            raise ValueError("delta must be nonnegative")
        self.exact = exact
        self.delta = float(delta)
        self.lipschitz = float(lipschitz)
        self.seed = int(seed)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        rng = np.random.default_rng([self.seed, abs(hash(x.tobytes())) % (2**32)])
        shift = rng.standard_normal(x.size)
        nrm = np.linalg.norm(shift)
        if nrm > 0 and self.lipschitz > 0:
            shift *= (self.delta / self.lipschitz) / nrm * rng.uniform()
        else:
            shift[:] = 0.0
        near = self.exact(x + shift)
        exact_here = self.exact(x)
        value = exact_here.value + self.delta * rng.uniform(-1.0, 1.0)
        return OracleResponse(value, near.subgradient, delta=self.delta,
                              active_index=near.active_index)


class ConstraintBundle:
    """g(x) = max_i g_i(x), reported with the lowest attaining index."""

    def __init__(self, pieces):
        pieces = list(pieces)
        if not pieces:
            raise ValueError("empty constraint bundle")
        self.pieces = pieces

    def __len__(self):
        return len(self.pieces)

    def __call__(self, x):
        return aggregate_max(self, x)


class LinearMaxBundle(ConstraintBundle):
    """Bundle of linear pieces g_i(x) = <a_i, x> + b_i with a vectorized
    max-aggregation; semantics identical to the piece-by-piece path."""

    def __init__(self, A, b):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        super().__init__([LinearOracle(a, bb) for a, bb in zip(self.A, self.b)])

    def evaluate(self, x):
        vals = self.A @ x + self.b
        i = int(np.argmax(vals))        # first maximum, lowest index
        return OracleResponse(float(vals[i]), self.A[i].copy(),
                              active_index=i + 1)


def aggregate_max(bundle, x):
    """Max-aggregate the bundle, tie-broken to the lowest index (1-based)."""
    x = np.asarray(x, dtype=float)
    fast = getattr(bundle, "evaluate", None)
    if fast is not None:
        return fast(x)
    best = None
    best_i = -1
    for i, piece in enumerate(bundle.pieces):
        resp = piece(x)
        if best is None or resp.value > best.value:
            best, best_i = resp, i
    return OracleResponse(best.value, best.subgradient, delta=best.delta,
                          active_index=best_i + 1)


@dataclass
class ProblemInstance:
    """Objective oracle, optional aggregated constraint, feasible set,
    optional Lipschitz constants and known-optimum metadata."""

    objective: object
    set: object  # FeasibleSet
    constraints: ConstraintBundle | None = None
    lipschitz_f: float | None = None
    lipschitz_g: float | None = None
    f_star: float | None = None
    x_star: np.ndarray | None = None
    meta: dict | None = None


@dataclass
class SaddleOperator:
    """Monotone operator Phi(z) over a product feasible set.

    For a bilinear game Phi is affine: Phi(z) = G z + c (G skew-symmetric),
    which the certificates in mirrorprox.py exploit.
    """

    phi: object
    domain: object  # ProductSetup
    lipschitz: float | None = None
    holder_nu: float | None = None
    holder_l: float | None = None
    linear_part: np.ndarray | None = None
    affine_part: np.ndarray | None = None
    meta: dict | None = None

    def __call__(self, z):
        return np.asarray(self.phi(np.asarray(z, dtype=float)), dtype=float)
