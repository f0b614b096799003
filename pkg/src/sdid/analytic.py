"""Closed-form coherence of a control qubit dephased by decaying spectators.

The control-qubit coherence Tr[rho_01(t)] factorizes over spectators.  A
spectator frozen in |0> contributes a pure phase e^{-2i nu t}; an initially
excited spectator contributes

    (4 i nu e^{(2 i nu - gamma) t} - gamma e^{-2 i nu t}) / (4 i nu - gamma),

and the control's intrinsic decoherence multiplies everything by
e^{-gamma_tilde t}.  CPMG suppression enters through the effective coupling
nu' = nu / (n + 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DeviceModel, SpectatorInit, parse_spectator_init


@dataclass(frozen=True)
class CoherenceTrace:
    """Time grid plus complex coherence values, with the applied normalization.

    `values` are the (possibly rescaled) Tr[rho_01(t)]; `normalization` is the
    multiplicative factor that was applied to the raw trace (1.0 means none).
    `stderr` is the per-point standard error for Monte-Carlo traces, None for
    deterministic engines.
    """

    times: np.ndarray
    values: np.ndarray
    normalization: complex = 1.0
    stderr: np.ndarray | None = None


def eta_diag(init: int, nu: float, gamma1: float, t) -> np.ndarray:
    """Per-spectator coherence factor with intrinsic control decay removed.

    init=0: e^{-2i nu t}.  init=1: the decaying-spectator factor above.  The
    denominator 4i nu - gamma1 only vanishes when both are zero, where the
    factor is identically 1.
    """
    t = np.asarray(t, dtype=float)
    if init == 0:
        return np.exp(-2j * nu * t)
    if init != 1:
        raise ValueError("init must be 0 or 1")
    denom = 4j * nu - gamma1
    if denom == 0:
        return np.ones_like(t, dtype=complex)
    return (4j * nu * np.exp((2j * nu - gamma1) * t)
            - gamma1 * np.exp(-2j * nu * t)) / denom


def coherence_1spec(c00: complex, c11: complex, nu: float,
                    gamma0_tilde: float, gamma1: float, t) -> np.ndarray:
    """Tr[rho_01(t)] for one spectator with initial diagonal (c00, c11)."""
    t = np.asarray(t, dtype=float)
    envelope = np.exp(-gamma0_tilde * t)
    return envelope * (c00 * eta_diag(0, nu, gamma1, t)
                       + c11 * eta_diag(1, nu, gamma1, t))


def coherence_Nspec(device: DeviceModel, s: SpectatorInit, t,
                    amplitude: complex = 1.0) -> np.ndarray:
    """Tr[rho_01(t)] for N spectators each starting in a Z eigenstate."""
    s = parse_spectator_init(s, device.n_spectators)
    t = np.asarray(t, dtype=float)
    out = amplitude * np.exp(-device.control.gamma_tilde * t) * np.ones_like(
        t, dtype=complex)
    for bit, (q, nu) in zip(s, device.spectators):
        out = out * eta_diag(bit, nu, q.gamma, t)
    return out


def ramsey_trace(device: DeviceModel, s: SpectatorInit, times,
                 normalized: bool = True,
                 spam_scale: complex = 1.0) -> CoherenceTrace:
    """Analytic Ramsey trace; control starts in |+> (raw initial coherence 1/2).

    With `normalized` the curve starts at 1; `spam_scale` multiplies the whole
    curve afterwards (single-parameter SPAM rescale).
    """
    times = np.asarray(times, dtype=float)
    amplitude = 1.0 if normalized else 0.5
    values = spam_scale * coherence_Nspec(device, s, times, amplitude=amplitude)
    return CoherenceTrace(times=times, values=values,
                          normalization=spam_scale * (amplitude / 0.5))


def heuristic_rate(device: DeviceModel, s: SpectatorInit) -> float:
    """Enhanced exponential decay rate 1/T2(0) + sum over excited spectators of 1/T1."""
    s = parse_spectator_init(s, device.n_spectators)
    rate = device.control.gamma_tilde
    for bit, (q, _) in zip(s, device.spectators):
        if bit:
            rate += q.gamma
    return rate


def cpmg_effective(device: DeviceModel, n: int) -> DeviceModel:
    """Device with every coupling replaced by nu/(n+1); rates unchanged."""
    if n < 0:
        raise ValueError("CPMG order must be >= 0")
    return device.with_couplings(device.nus / (n + 1))


def phase_bounds(total_time: float, n: int, nu: float) -> tuple[float, float]:
    """Bounds (0, 2 nu T / (n+1)) on the random phase from one excited spectator."""
    if n < 0:
        raise ValueError("CPMG order must be >= 0")
    return 0.0, 2.0 * abs(nu) * total_time / (n + 1)
