"""Mirror-descent update solvers for the simplex and lp-ball geometries.

The constrained update argmin_{y in X} eta <y, lhat> + D_F(y, x) is solved in
the dual: y = (h')^{-1}(h'(x) - eta * lhat + lam) with the scalar multiplier
lam found by a safeguarded Newton search on the normalisation constraint.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import ClippedLp, LpBall, Potential, Simplex

ITERATE_FLOOR = 1e-300
MAX_ITERS = 200


class SolverError(RuntimeError):
    """Mirror step failed to converge; carries diagnostics."""


@dataclass(frozen=True)
class MirrorStepRequest:
    potential: Potential
    geometry: object  # Simplex or LpBall
    x: np.ndarray
    loss_estimate: np.ndarray
    eta: float

    def __post_init__(self):
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")


def _simplex_sums(
    pot: Potential, theta: np.ndarray, lam: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Row sums of the dual-inverse coordinates and their derivative in lam."""
    # bracketing probes may sit on the open end of the gradient range, where
    # the dual inverse legitimately overflows to inf; the search handles it
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        y = pot.dual_inv(theta + lam[:, None])
        s = np.sum(y, axis=1)
        ds = np.sum(1.0 / pot.h_double(y), axis=1)
    return s, ds


def simplex_step_batch(
    pot: Potential,
    x: np.ndarray,
    loss_estimate: np.ndarray,
    eta: float,
    lam0: np.ndarray | None = None,
    tol: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Constrained simplex steps for a batch of independent iterates.

    x and loss_estimate are (runs, k); returns the (runs, k) new points and
    the (runs,) multipliers.  Every operation is elementwise per run, so a
    run's result never depends on what else shares the batch (this is what
    makes parallel sweeps reproducible at any worker count).  lam0 warm-starts
    the Newton search.
    """
    x = np.asarray(x, dtype=float)
    theta = pot.h_prime(x) - eta * np.asarray(loss_estimate, dtype=float)
    runs = theta.shape[0]

    theta_max = np.max(theta, axis=1)
    span = np.maximum(1.0, theta_max - np.min(theta, axis=1))

    # establish per-run brackets [lo, hi] with S(lo) < 1 < S(hi);
    # lam must keep every theta_i + lam strictly inside the gradient range
    if np.isfinite(pot.grad_upper):
        hi_limit = pot.grad_upper - theta_max
        hi = hi_limit - 1e-16 * np.maximum(1.0, np.abs(hi_limit))
        for _ in range(MAX_ITERS):
            need = _simplex_sums(pot, theta, hi)[0] < 1.0
            if not np.any(need):
                break
            # push towards the open endpoint where S blows up
            hi = np.where(need, hi_limit - (hi_limit - hi) / 16.0, hi)
            if np.any(need & (hi_limit - hi < 1e-300)):
                raise SolverError("simplex step: cannot bracket multiplier (hi)")
        else:
            raise SolverError("simplex step: cannot bracket multiplier (hi)")
    else:
        hi = -theta_max
        step = span.copy()
        for _ in range(MAX_ITERS):
            need = _simplex_sums(pot, theta, hi)[0] < 1.0
            if not np.any(need):
                break
            hi = np.where(need, hi + step, hi)
            step = np.where(need, step * 2.0, step)
        else:
            raise SolverError("simplex step: cannot bracket multiplier (hi)")
    lo = hi - np.maximum(span, 1.0)
    step = np.maximum(span, 1.0)
    for _ in range(MAX_ITERS):
        need = _simplex_sums(pot, theta, lo)[0] > 1.0
        if not np.any(need):
            break
        lo = np.where(need, lo - step, lo)
        step = np.where(need, step * 2.0, step)
    else:
        raise SolverError("simplex step: cannot bracket multiplier (lo)")

    mid = 0.5 * (lo + hi)
    if lam0 is None:
        lam = mid
    else:
        lam0 = np.asarray(lam0, dtype=float)
        lam = np.where((lo < lam0) & (lam0 < hi), lam0, mid)

    lam_out = lam.copy()
    y_out = np.empty_like(theta)
    active = np.ones(runs, dtype=bool)
    for _ in range(MAX_ITERS):
        s, ds = _simplex_sums(pot, theta, lam)
        err = s - 1.0
        done = np.abs(err) <= tol
        newly = active & done
        if np.any(newly):
            lam_out = np.where(newly, lam, lam_out)
            y_out[newly] = pot.dual_inv(theta[newly] + lam[newly, None])
            active &= ~done
        if not np.any(active):
            return np.maximum(y_out, ITERATE_FLOOR), lam_out
        hi = np.where(active & (err > 0.0), lam, hi)
        lo = np.where(active & (err <= 0.0), lam, lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            lam_newton = lam - err / ds
        ok = (ds > 0.0) & np.isfinite(lam_newton) & (lo < lam_newton) & (lam_newton < hi)
        lam = np.where(active, np.where(ok, lam_newton, 0.5 * (lo + hi)), lam)
    raise SolverError(
        f"simplex step did not converge: worst residual "
        f"{float(np.max(np.abs(err[active]))):.3e}, "
        f"eta={eta}, potential={type(pot).__name__}"
    )


def simplex_step(
    pot: Potential,
    x: np.ndarray,
    loss_estimate: np.ndarray,
    eta: float,
    lam0: float | None = None,
    tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    """Constrained step on the simplex; returns (new point, multiplier)."""
    y, lam = simplex_step_batch(
        pot,
        np.asarray(x, dtype=float)[None, :],
        np.asarray(loss_estimate, dtype=float)[None, :],
        eta,
        lam0=None if lam0 is None else np.array([lam0]),
        tol=tol,
    )
    return y[0], float(lam[0])


def unconstrained_step(req: MirrorStepRequest) -> np.ndarray | None:
    """Dual gradient step without the feasibility constraint (g map).

    Returns None when the shifted dual point leaves the gradient range of F,
    in which case the unconstrained minimiser does not exist.
    """
    pot = req.potential
    theta = pot.h_prime(np.asarray(req.x, dtype=float)) - req.eta * np.asarray(
        req.loss_estimate, dtype=float
    )
    if not np.all(pot.in_grad_range(theta)):
        return None
    return pot.dual_inv(theta)


def constrained_step(req: MirrorStepRequest) -> np.ndarray:
    """Constrained mirror step (f map) for either geometry."""
    if isinstance(req.geometry, Simplex):
        y, _ = simplex_step(req.potential, req.x, req.loss_estimate, req.eta)
        return y
    if isinstance(req.geometry, LpBall):
        return ball_step(req)
    raise ValueError(f"unsupported geometry {req.geometry!r}")


# ---------------------------------------------------------------------------
# lp-ball steps


def _penalised_coordinates(
    pot: ClippedLp, theta: np.ndarray, mu: float, p: float
) -> np.ndarray:
    """Solve h'(y_i) + mu * sign(y_i) |y_i|^(p-1) = theta_i per coordinate."""
    if mu == 0.0:
        return pot.dual_inv(theta)
    s = np.sign(theta)
    a = np.abs(theta)
    if p == 1.0:
        # soft threshold: active coordinates solve h'(y) = |theta| - mu
        y = np.where(a > mu, np.abs(pot.dual_inv(np.maximum(a - mu, 0.0))), 0.0)
        return s * y
    hi = np.abs(pot.dual_inv(a))  # mu >= 0 only shrinks the solution
    lo = np.zeros_like(hi)
    y = 0.5 * hi
    tol = 1e-14 * max(1.0, float(np.max(a)))
    for _ in range(100):
        g = pot.h_prime(y) + mu * y ** (p - 1.0) - a
        live = np.abs(g) > tol
        if not np.any(live):
            break
        hi = np.where(live & (g > 0.0), y, hi)
        lo = np.where(live & (g <= 0.0), y, lo)
        dg = pot.h_double(y) + mu * (p - 1.0) * np.where(y > 0.0, y, 1.0) ** (p - 2.0)
        y_newton = y - g / dg
        inside = (y_newton > lo) & (y_newton < hi)
        y = np.where(live, np.where(inside, y_newton, 0.5 * (lo + hi)), y)
    return s * y


def _lp_norm(y: np.ndarray, p: float) -> float:
    return float(np.sum(np.abs(y) ** p) ** (1.0 / p)) if p > 1.0 else float(
        np.sum(np.abs(y))
    )


def ball_step(req: MirrorStepRequest, mu0: float | None = None) -> np.ndarray:
    """Mirror step on the unit lp-ball with a ClippedLp potential.

    The unconstrained dual step is exact; when it leaves the ball the KKT
    multiplier mu of the norm constraint is found by bisection (the norm of
    the penalised solution is monotone decreasing in mu).
    """
    pot = req.potential
    if not isinstance(pot, ClippedLp):
        raise ValueError("ball_step requires a ClippedLp potential")
    p = float(req.geometry.p) if isinstance(req.geometry, LpBall) else pot.p
    theta = pot.h_prime(np.asarray(req.x, dtype=float)) - req.eta * np.asarray(
        req.loss_estimate, dtype=float
    )
    y = pot.dual_inv(theta)
    if _lp_norm(y, p) <= 1.0:
        return y

    lo, f_lo = 0.0, _lp_norm(y, p) - 1.0
    hi = mu0 if mu0 is not None and mu0 > 0.0 else 1.0
    it = 0
    while True:
        f_hi = _lp_norm(_penalised_coordinates(pot, theta, hi, p), p) - 1.0
        if f_hi <= 0.0:
            break
        lo, f_lo = hi, f_hi
        hi *= 4.0
        it += 1
        if it > 200:
            raise SolverError("ball step: cannot bracket the norm multiplier")

    # the excess norm is monotone decreasing in mu; Illinois regula falsi on
    # the bracket converges superlinearly and can never leave it
    a, f_a = lo, f_lo
    b, f_b = hi, f_hi
    if f_b == 0.0:
        return _penalised_coordinates(pot, theta, b, p)
    f = f_b
    for _ in range(200):
        mu = (a * f_b - b * f_a) / (f_b - f_a)
        if not min(a, b) < mu < max(a, b):
            mu = 0.5 * (a + b)
        y = _penalised_coordinates(pot, theta, mu, p)
        f = _lp_norm(y, p) - 1.0
        if abs(f) <= 1e-10:
            return y
        if f * f_b < 0.0:
            a, f_a = b, f_b
        else:
            f_a *= 0.5
        b, f_b = mu, f
    raise SolverError(
        f"ball step: multiplier search stalled at |y|_p = {f + 1.0:.12f}"
    )
