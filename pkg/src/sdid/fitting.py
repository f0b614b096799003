"""Damped least-squares curve fitting for decay curves and RB data.

Two models are supported: exponential decay A e^{-r t} + C for coherence
magnitudes (T2 = 1/r) and B + A p^m for randomized-benchmarking survival
(error per Clifford = (1 - p)/2).  Both use a Levenberg-Marquardt loop with
analytic Jacobians and data-driven initial guesses; non-convergence is
flagged rather than raised, returning the best iterate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass
class FitResult:
    params: dict[str, float]
    stderr: dict[str, float]
    residual_norm: float
    model: str
    converged: bool = True
    warnings: list[str] = field(default_factory=list)


def _levenberg_marquardt(residual_fn, jacobian_fn, theta0,
                         max_iter: int = 200,
                         rel_tol: float = 1e-10):
    """Minimize ||residual(theta)||^2 by damped normal equations.

    Converges when the relative parameter change drops below rel_tol.
    Returns (theta, covariance, converged, n_iter).
    """
    theta = np.asarray(theta0, dtype=float)
    lam = 1e-3
    r = residual_fn(theta)
    cost = float(r @ r)
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        jac = jacobian_fn(theta)
        jtj = jac.T @ jac
        jtr = jac.T @ r
        stepped = False
        for _ in range(40):
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(np.diag(jtj))
                                        + 1e-300 * np.eye(theta.size), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            trial = theta + delta
            r_trial = residual_fn(trial)
            cost_trial = float(r_trial @ r_trial)
            if np.isfinite(cost_trial) and cost_trial <= cost:
                rel_change = np.max(np.abs(delta)
                                    / np.maximum(np.abs(theta), 1e-300))
                cost_drop = cost - cost_trial
                theta, r, cost = trial, r_trial, cost_trial
                lam = max(lam / 10, 1e-12)
                stepped = True
                if rel_change < rel_tol or cost_drop <= rel_tol * cost:
                    converged = True
                break
            lam *= 10
        if not stepped:
            # Damping exhausted: no downhill step exists, treat as converged.
            converged = True
        if converged:
            break
    jac = jacobian_fn(theta)
    dof = max(r.size - theta.size, 1)
    sigma2 = cost / dof
    try:
        cov = sigma2 * np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        cov = np.full((theta.size, theta.size), np.nan)
    return theta, cov, converged, n_iter


def fit_exponential(times, magnitudes,
                    offset: float | None = None) -> FitResult:
    """Fit A e^{-r t} + C; reports rate r, t2 = 1/r, amplitude, and offset.

    Pass `offset` to pin C (e.g. 0 for data known to decay to zero), which
    stabilizes the fit when the data oscillates around its envelope.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(magnitudes, dtype=float)
    if t.size < 4:
        raise ValueError("fit_exponential needs at least 4 points")
    if np.any(y <= 0):
        raise ValueError("magnitudes must be positive")

    # Log-linear seed on the floored data.
    floor = y.min() if offset is None else float(offset)
    shifted = np.maximum(y - floor, 0.0) + 1e-3 * (y.max() - floor + 1e-300)
    slope, intercept = np.polyfit(t, np.log(shifted), 1)
    a0 = np.exp(intercept)
    r0 = max(-slope, 0.0)
    if r0 <= 0:
        r0 = 1.0 / (t.max() - t.min() + 1e-300)

    if offset is None:
        theta0 = np.array([a0, r0, floor])

        def residual(theta):
            a, r, c = theta
            return a * np.exp(np.clip(-r * t, None, 50.0)) + c - y

        def jacobian(theta):
            a, r, c = theta
            e = np.exp(np.clip(-r * t, None, 50.0))
            return np.stack([e, -a * t * e, np.ones_like(t)], axis=1)

        theta, cov, converged, _ = _levenberg_marquardt(residual, jacobian,
                                                        theta0)
        a, r, c = theta
        se = np.sqrt(np.abs(np.diag(cov)))
        se_a, se_r, se_c = se
    else:
        def residual(theta):
            a, r = theta
            return a * np.exp(np.clip(-r * t, None, 50.0)) + floor - y

        def jacobian(theta):
            a, r = theta
            e = np.exp(np.clip(-r * t, None, 50.0))
            return np.stack([e, -a * t * e], axis=1)

        theta, cov, converged, _ = _levenberg_marquardt(
            residual, jacobian, np.array([a0, r0]))
        a, r = theta
        c = floor
        se = np.sqrt(np.abs(np.diag(cov)))
        se_a, se_r, se_c = se[0], se[1], 0.0

    notes = []
    if not converged:
        notes.append("fit did not converge; returning best iterate")
        warnings.warn(notes[-1])
    if r <= 0:
        notes.append("fitted rate is non-positive")
    params = {"amplitude": a, "rate": r, "offset": c,
              "t2": 1.0 / r if r > 0 else np.inf}
    stderr = {"amplitude": se_a, "rate": se_r, "offset": se_c,
              "t2": se_r / r ** 2 if r > 0 else np.inf}
    res = a * np.exp(np.clip(-r * t, None, 50.0)) + c - y
    return FitResult(params=params, stderr=stderr,
                     residual_norm=float(np.linalg.norm(res)),
                     model="A*exp(-rate*t)+C", converged=converged,
                     warnings=notes)


def fit_rb(lengths, survival, offset: float | None = None) -> FitResult:
    """Fit B + A p^m; reports p, EPC = (1-p)/2, amplitude, and offset.

    For shallow decays the three-parameter fit is degenerate (only the
    product A(1-p) is constrained), so when the asymptote is known, e.g.
    B = 1/2 for a SPAM-free simulation, pass it via `offset` to fix B and
    fit only A and p.
    """
    m = np.asarray(lengths, dtype=float)
    y = np.asarray(survival, dtype=float)
    if np.unique(m).size < 3:
        raise ValueError("fit_rb needs at least 3 distinct lengths")

    b0 = 0.5 if offset is None else float(offset)
    a0 = y[np.argmin(m)] - b0
    if abs(a0) < 1e-6:
        a0 = 0.5
    span = m.max() - m.min()
    tail = (y[np.argmax(m)] - b0) / a0
    if tail > 0 and span > 0:
        p0 = float(np.clip(tail ** (1.0 / span), 1e-6, 1.0))
    else:
        p0 = 0.99

    if offset is None:
        def residual(theta):
            a, b, p = theta
            return a * np.power(np.clip(p, 1e-12, None), m) + b - y

        def jacobian(theta):
            a, b, p = theta
            pc = np.clip(p, 1e-12, None)
            pm = np.power(pc, m)
            return np.stack([pm, np.ones_like(m),
                             a * m * np.power(pc, m - 1)], axis=1)

        theta, cov, converged, _ = _levenberg_marquardt(
            residual, jacobian, np.array([a0, b0, p0]))
        a, b, p = theta
        se = np.sqrt(np.abs(np.diag(cov)))
        se_a, se_b, se_p = se
    else:
        def residual(theta):
            a, p = theta
            return a * np.power(np.clip(p, 1e-12, None), m) + b0 - y

        def jacobian(theta):
            a, p = theta
            pc = np.clip(p, 1e-12, None)
            return np.stack([np.power(pc, m),
                             a * m * np.power(pc, m - 1)], axis=1)

        theta, cov, converged, _ = _levenberg_marquardt(
            residual, jacobian, np.array([a0, p0]))
        a, p = theta
        b = b0
        se = np.sqrt(np.abs(np.diag(cov)))
        se_a, se_b, se_p = se[0], 0.0, se[1]
        theta = np.array([a, b, p])
    notes = []
    if not converged:
        notes.append("fit did not converge; returning best iterate")
        warnings.warn(notes[-1])
    if not 0.0 < p <= 1.0 + 1e-12:
        notes.append(f"fitted p = {p:.6g} outside (0, 1]")
    params = {"amplitude": a, "offset": b, "p": p, "epc": (1.0 - p) / 2.0}
    stderr = {"amplitude": se_a, "offset": se_b, "p": se_p,
              "epc": se_p / 2.0}
    res = a * np.power(np.clip(p, 1e-12, None), m) + b - y
    return FitResult(params=params, stderr=stderr,
                     residual_norm=float(np.linalg.norm(res)),
                     model="B+A*p^m", converged=converged, warnings=notes)
