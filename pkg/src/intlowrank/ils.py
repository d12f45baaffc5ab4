"""Unconstrained integer least squares.

The solver runs in two stages: a lattice reduction that re-expresses
min ||y - H x||^2 as an upper-triangular problem min ||y_hat - R z||^2
with x = Z z for a unimodular Z, followed by a depth-first zigzag
enumeration that shrinks its squared-radius bound every time a better
point is found and therefore terminates at a global minimizer.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    givens_coeffs,
    householder_qr,
    householder_qr_min_pivot,
    require_finite,
    rotate_rows,
    round_half_away,
)

_LOOP_GUARD = 200_000
# Margin for the column-swap tests. A swap must shrink the diagonal by a
# bounded relative amount, otherwise rounding noise on exact ties (where
# a swap just exchanges the two quantities) ping-pongs forever.
_SWAP_MARGIN = 1e-12


@dataclass
class SearchStats:
    """Instrumentation for a single search invocation."""

    nodes: int = 0
    betas: list = field(default_factory=list)


@dataclass
class ReducedProblem:
    """Triangularized problem min ||y_hat - R z||^2 with x = Z z.

    offset is the squared-residual mass orthogonal to the column space:
    for every integer z, ||y - H (Z z)||^2 = ||y_hat - R z||^2 + offset.
    """

    R: np.ndarray
    Z: np.ndarray
    y_hat: np.ndarray
    offset: float

    @property
    def n(self):
        return self.R.shape[0]


def _project(Q1, y):
    y_hat = Q1.T @ y
    offset = max(float(y @ y - y_hat @ y_hat), 0.0)
    return y_hat, offset


def integer_gauss_transform(R, Z, i, j):
    """Subtract round(r_ij / r_ii) times column i from column j, i < j.

    Only rows <= i of column j change, so R stays upper triangular and
    |r_ij| <= |r_ii| / 2 afterwards. The same elementary column operation
    lands on Z, which keeps |det Z| = 1. Operates in place.
    """
    zeta = int(round_half_away(R[i, j] / R[i, i]))
    if zeta != 0:
        R[: i + 1, j] -= zeta * R[: i + 1, i]
        Z[:, j] -= zeta * Z[:, i]
    return R, Z


def _swap_and_retriangularize(R, Z, y_hat, k):
    """Swap columns k-1, k and restore triangularity with one rotation."""
    R[:, [k - 1, k]] = R[:, [k, k - 1]]
    Z[:, [k - 1, k]] = Z[:, [k, k - 1]]
    c, s = givens_coeffs(R[k - 1, k - 1], R[k, k - 1])
    rotate_rows(R, k - 1, k, c, s)
    R[k, k - 1] = 0.0
    rotate_rows(y_hat, k - 1, k, c, s)


def lll_reduce(H, y, delta=1.0):
    """Full lattice reduction of min ||y - H x||^2.

    The returned R satisfies both the size-reduction condition
    |r_ij| <= |r_ii| / 2 (i < j) and the diagonal condition
    delta * r_{k-1,k-1}^2 <= r_{k-1,k}^2 + r_kk^2 on adjacent pairs.
    delta must lie in (1/4, 1]; the default 1 gives the strongest
    diagonal ordering.
    """
    if not 0.25 < delta <= 1.0:
        raise ValueError(f"delta must lie in (1/4, 1], got {delta}")
    H = np.atleast_2d(np.asarray(H, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    require_finite(y, "y")
    Q1, R = householder_qr(H)
    n = R.shape[0]
    Z = np.eye(n, dtype=np.int64)
    y_hat, offset = _project(Q1, y)
    k = 1
    for _ in range(_LOOP_GUARD):
        if k >= n:
            break
        for i in range(k - 1, -1, -1):
            integer_gauss_transform(R, Z, i, k)
        if delta * R[k - 1, k - 1] ** 2 > (R[k - 1, k] ** 2 + R[k, k] ** 2) * (1.0 + _SWAP_MARGIN):
            _swap_and_retriangularize(R, Z, y_hat, k)
            if k > 1:
                k -= 1
        else:
            k += 1
    else:
        raise RuntimeError("lattice reduction failed to terminate")
    return ReducedProblem(R=R, Z=Z, y_hat=y_hat, offset=offset)


def plll_reduce(H, y):
    """Partial lattice reduction: size-reduce only around column swaps.

    Starts from a QR factorization with ascending-norm column pivoting and
    guarantees the diagonal condition with delta = 1 on adjacent pairs;
    size reduction is applied only to columns that get permuted. The
    residual identity of the returned problem holds regardless.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    require_finite(y, "y")
    Q1, R, perm = householder_qr_min_pivot(H)
    n = R.shape[0]
    Z = np.zeros((n, n), dtype=np.int64)
    Z[perm, np.arange(n)] = 1
    y_hat, offset = _project(Q1, y)
    k = 1
    for _ in range(_LOOP_GUARD):
        if k >= n:
            break
        zeta = int(round_half_away(R[k - 1, k] / R[k - 1, k - 1]))
        alpha = R[k - 1, k] - zeta * R[k - 1, k - 1]
        if R[k - 1, k - 1] ** 2 > (alpha**2 + R[k, k] ** 2) * (1.0 + _SWAP_MARGIN):
            if zeta != 0:
                integer_gauss_transform(R, Z, k - 1, k)
            for i in range(k - 2, -1, -1):
                integer_gauss_transform(R, Z, i, k)
            _swap_and_retriangularize(R, Z, y_hat, k)
            if k > 1:
                k -= 1
        else:
            k += 1
    else:
        raise RuntimeError("lattice reduction failed to terminate")
    return ReducedProblem(R=R, Z=Z, y_hat=y_hat, offset=offset)


def se_search(rp, beta0=np.inf, stats=None):
    """Depth-first zigzag enumeration of min ||y_hat - R z||^2 over Z^n.

    Returns a global minimizer z. With the default infinite initial bound
    a minimizer always exists; a finite beta0 that excludes every lattice
    point yields None. Bound comparisons are strict, so the sequence of
    accepted bounds is strictly decreasing.
    """
    R, y_hat = rp.R, rp.y_hat
    n = rp.n
    if n == 1:
        z0 = int(round_half_away(y_hat[0] / R[0, 0]))
        d = y_hat[0] - R[0, 0] * z0
        if stats is not None:
            stats.nodes += 1
        if d * d >= beta0:
            return None
        if stats is not None:
            stats.betas.append(d * d)
        return np.array([z0], dtype=np.int64)

    beta = float(beta0)
    best = None
    c = np.zeros(n)
    t = np.zeros(n)
    z = np.zeros(n, dtype=np.int64)
    step = np.zeros(n, dtype=np.int64)

    def _enter(k):
        c[k] = (y_hat[k] - R[k, k + 1 :] @ z[k + 1 :]) / R[k, k]
        z[k] = int(round_half_away(c[k]))
        step[k] = 1 if c[k] >= z[k] else -1

    k = n - 1
    _enter(k)
    while True:
        if stats is not None:
            stats.nodes += 1
        d = R[k, k] * (z[k] - c[k])
        partial = t[k] + d * d
        if partial < beta:
            if k > 0:
                t[k - 1] = partial
                k -= 1
                _enter(k)
                continue
            beta = partial
            best = z.copy()
            if stats is not None:
                stats.betas.append(beta)
        # The zigzag emits candidates in nondecreasing distance order, so a
        # failed bound ends the level; resume one level up.
        k += 1
        if k >= n:
            return best
        z[k] += step[k]
        step[k] = -step[k] - (1 if step[k] > 0 else -1)


def solve_ils(H, y, stats=None):
    """Globally minimize ||y - H x||_2^2 over integer vectors x.

    Returns (x, residual_sq). H must have full column rank.
    """
    H = np.atleast_2d(np.asarray(H, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    rp = plll_reduce(H, y)
    z = se_search(rp, stats=stats)
    x = rp.Z @ z
    r = y - H @ x
    return x, float(r @ r)
