"""Randomized benchmarking under spectator decay.

Conditional control-qubit channels are obtained by projecting the two-qubit
Lindblad propagator onto a spectator initial/final state pair; they are
diagonal, diag(1, lambda, lambda*, 1), in the column-stacked basis.  The RB
decay constant of a channel is p = (Tr - 1)/3.  A Clifford-level simulator
tracks the spectator classically (one decay event at a random gate) and
demonstrates that RB is insensitive to spectator-decay-induced dephasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from . import operators as ops
from .model import DeviceModel, QubitParams
from .model import build_liouvillian


class ForbiddenTransitionError(ValueError):
    """Spectator excitation 0 -> 1 cannot occur at zero temperature."""


@dataclass(frozen=True)
class ConditionalChannel:
    """Control-qubit channel conditioned on spectator initial/final bits.

    `superop` is the normalized 4x4 map on vec(rho_c); `norm` is the
    probability of the (i -> j) spectator transition.
    """

    i: int
    j: int
    superop: np.ndarray
    norm: float

    @property
    def lam(self) -> complex:
        """Off-diagonal eigenvalue: diag(superop) = (1, lam, lam*, 1)."""
        return complex(self.superop[1, 1])


def conditional_channel(i: int, j: int, nu: float, gamma1: float,
                        t_gate: float) -> ConditionalChannel:
    """Project the two-qubit propagator onto spectator states |i> -> |j>.

    The two-qubit device has no control dissipation; t_gate > 0.
    """
    if i not in (0, 1) or j not in (0, 1):
        raise ValueError("spectator bits must be 0 or 1")
    if t_gate <= 0:
        raise ValueError("t_gate must be positive")
    if (i, j) == (0, 1):
        raise ForbiddenTransitionError(
            "spectator transition 0 -> 1 is forbidden at zero temperature")
    device = DeviceModel(control=QubitParams(label="control"),
                         spectators=((QubitParams(gamma=gamma1,
                                                  label="spectator"), nu),))
    prop = ops.expm(build_liouvillian(device).superop * t_gate)

    bra_j = (ops.KET_1 if j else ops.KET_0).conj().reshape(1, 2)
    # vec index of the 4x4 rho decomposes as (c_col, s_col, c_row, s_row).
    project = ops.kron_all([ops.I2, bra_j, ops.I2, bra_j])
    ket_i = ops.KET_1 if i else ops.KET_0
    rho_s = np.outer(ket_i, ket_i.conj())

    lifted = np.empty((4, 4), dtype=complex)
    for m in range(4):
        rho_c = ops.unvectorize(np.eye(4)[m])
        lifted[:, m] = project @ prop @ ops.vectorize(np.kron(rho_c, rho_s))
    norm = lifted[0, 0].real
    if norm <= 1e-14:
        raise ForbiddenTransitionError(
            f"spectator transition {i} -> {j} has zero probability")
    return ConditionalChannel(i=i, j=j, superop=lifted / norm, norm=norm)


def lambda_analytic(i: int, j: int, nu: float, gamma1: float,
                    t: float) -> complex:
    """Closed-form channel eigenvalues lambda_00, lambda_11, lambda_10."""
    if (i, j) == (0, 0):
        return np.exp(2j * nu * t)
    if (i, j) == (1, 1):
        return np.exp(-2j * nu * t)
    if (i, j) == (1, 0):
        if gamma1 <= 0:
            raise ValueError("lambda_10 requires gamma1 > 0 (relaxation must "
                             "be possible)")
        num = gamma1 * (np.exp(2j * nu * t)
                        - np.exp(-(gamma1 + 2j * nu) * t))
        den = (gamma1 + 4j * nu) * (1.0 - np.exp(-gamma1 * t))
        return complex(num / den)
    raise ForbiddenTransitionError(
        "spectator transition 0 -> 1 is forbidden at zero temperature")


def transition_probability(i: int, j: int, gamma1: float, t: float) -> float:
    """N_ij: probability of the spectator transition over a window t."""
    survive = np.exp(-gamma1 * t)
    return {(0, 0): 1.0, (0, 1): 0.0, (1, 1): survive,
            (1, 0): 1.0 - survive}[(i, j)]


def rb_decay_constant(chan) -> float:
    """p = (Tr[superop] - 1) / 3 for a trace-preserving single-qubit channel."""
    superop = chan.superop if isinstance(chan, ConditionalChannel) else chan
    return float((np.trace(superop).real - 1.0) / 3.0)


def p_experimental(i: int, nu: float, t: float) -> float:
    """RB decay constants in the experimental (ground-state) calibration frame."""
    if i == 0:
        return 1.0
    if i == 1:
        return (1.0 + 2.0 * np.cos(4.0 * nu * t)) / 3.0
    raise ValueError("spectator bit must be 0 or 1")


@dataclass(frozen=True)
class CliffordGroup:
    """The 24 single-qubit Cliffords with composition and inverse tables."""

    unitaries: tuple[np.ndarray, ...]
    compose: np.ndarray   # compose[a, b] = index of U_a @ U_b
    inverse: np.ndarray   # inverse[a] = index of U_a^dagger

    def __len__(self) -> int:
        return len(self.unitaries)


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    """Fix the global phase so the first nonzero entry is positive real."""
    flat = u.ravel()
    pivot = flat[np.argmax(np.abs(flat) > 1e-9)]
    return u * (abs(pivot) / pivot)


def _key(u: np.ndarray) -> bytes:
    # Adding complex zero maps -0.0 to +0.0 in both components, so equal
    # matrices never hash to different byte strings.
    return (np.round(_canonical_phase(u), 9) + (0.0 + 0.0j)).tobytes()


@lru_cache(maxsize=1)
def clifford_group() -> CliffordGroup:
    """Generate the group from {H, S} by closure; order 24."""
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.array([[1, 0], [0, 1j]], dtype=complex)
    elements: list[np.ndarray] = [np.eye(2, dtype=complex)]
    index = {_key(elements[0]): 0}
    frontier = [elements[0]]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                v = _canonical_phase(g @ u)
                k = _key(v)
                if k not in index:
                    index[k] = len(elements)
                    elements.append(v)
                    nxt.append(v)
        frontier = nxt
    if len(elements) != 24:
        raise RuntimeError(f"Clifford closure produced {len(elements)} elements")
    n = len(elements)
    compose = np.empty((n, n), dtype=int)
    for a in range(n):
        for b in range(n):
            compose[a, b] = index[_key(elements[a] @ elements[b])]
    inverse = np.empty(n, dtype=int)
    for a in range(n):
        inverse[a] = index[_key(elements[a].conj().T)]
    return CliffordGroup(unitaries=tuple(elements), compose=compose,
                         inverse=inverse)


@dataclass
class RBCurve:
    """Sequence lengths, averaged survival probabilities, and fit results."""

    lengths: np.ndarray
    survival: np.ndarray
    stderr: np.ndarray
    n_seq: int
    fitted_a: float | None = None
    fitted_b: float | None = None
    fitted_p: float | None = None
    metadata: dict = field(default_factory=dict)


def _branch_weights(init: str, n_spec: int) -> list[tuple[tuple[int, ...], float]]:
    if init in ("0", "zero"):
        return [(tuple([0] * n_spec), 1.0)]
    if init in ("1", "one"):
        return [(tuple([1] * n_spec), 1.0)]
    if len(init) == n_spec and set(init) <= {"0", "1"}:
        return [(tuple(int(c) for c in init), 1.0)]
    if init in ("+", "plus"):
        # |+> preparations enter as an equal classical mixture of Z branches;
        # inter-branch coherences do not survive the twirl for this observable.
        weight = 0.5 ** n_spec
        return [(bits, weight) for bits in product((0, 1), repeat=n_spec)]
    raise ValueError(f"unknown spectator preparation {init!r}")


def _apply_diag_channel(rho: np.ndarray, lam: np.ndarray) -> None:
    """In-place diag(1, lam, lam*, 1) channel on a batch of 2x2 states."""
    rho[:, 1, 0] *= lam
    rho[:, 0, 1] *= lam.conj()


def simulate_rb(device: DeviceModel, init: str, lengths, n_seq: int,
                t_gate: float, frame: str = "experimental",
                seed: int = 0) -> RBCurve:
    """Clifford-level RB with per-gate conditional spectator-decay channels.

    Each spectator is tracked classically: it survives each gate window with
    probability e^{-gamma t_gate}; its channel eigenvalue is lambda_11 before
    the decay gate, lambda_10 during it, and lambda_00 afterwards.  The error
    channel (including on the recovery gate) is the product of per-spectator
    diagonal channels.  The 'experimental' frame divides out the ground-state
    ZZ phase per gate.
    """
    if frame not in ("bare", "experimental"):
        raise ValueError(f"unknown frame {frame!r}")
    lengths = np.asarray(lengths, dtype=int)
    if np.any(lengths < 1):
        raise ValueError("RB sequence lengths must be >= 1")
    group = clifford_group()
    unitaries = np.stack(group.unitaries)
    rng = np.random.Generator(np.random.Philox(key=seed))

    n_spec = device.n_spectators
    nus = device.nus
    gammas = device.spectator_gammas
    frame_phase = np.exp(-2j * nus * t_gate) if frame == "experimental" \
        else np.ones(n_spec, dtype=complex)
    lam00 = np.array([lambda_analytic(0, 0, nu, g, t_gate)
                      for nu, g in zip(nus, gammas)]) * frame_phase
    lam11 = np.array([lambda_analytic(1, 1, nu, g, t_gate)
                      for nu, g in zip(nus, gammas)]) * frame_phase
    lam10 = np.array([lambda_analytic(1, 0, nu, g, t_gate) if g > 0
                      else lam11[k] for k, (nu, g) in
                      enumerate(zip(nus, gammas))]) * frame_phase

    branches = _branch_weights(init, n_spec)
    ket0 = np.outer(ops.KET_0, ops.KET_0.conj())

    survival = np.empty(lengths.size)
    stderr = np.empty(lengths.size)
    for li, m in enumerate(lengths):
        per_seq = np.empty(n_seq)
        for sidx in range(n_seq):
            gates = rng.integers(0, len(group), size=m)
            net = 0
            for g in gates:
                net = group.compose[g, net]
            recovery = group.inverse[net]
            all_gates = np.append(gates, recovery)
            total_gates = m + 1

            # Decay gate index per (branch, spectator); 1-based, 0 = no decay.
            n_branch = len(branches)
            decay_gate = np.zeros((n_branch, n_spec), dtype=int)
            for bi, (bits, _) in enumerate(branches):
                for j in range(n_spec):
                    if bits[j] and gammas[j] > 0:
                        t_d = rng.exponential(1.0 / gammas[j])
                        k = int(t_d // t_gate) + 1
                        if k <= total_gates:
                            decay_gate[bi, j] = k

            rho = np.broadcast_to(ket0, (n_branch, 2, 2)).copy()
            excited = np.array([[bool(b) for b in bits]
                                for bits, _ in branches])
            for g_pos in range(total_gates):
                u = unitaries[all_gates[g_pos]]
                rho = np.einsum("ab,nbc,dc->nad", u, rho, u.conj())
                gate_no = g_pos + 1
                lam = np.ones(n_branch, dtype=complex)
                for j in range(n_spec):
                    lj = np.where(
                        excited[:, j] & (decay_gate[:, j] == 0), lam11[j],
                        np.where(excited[:, j] & (decay_gate[:, j] > gate_no),
                                 lam11[j],
                                 np.where(excited[:, j]
                                          & (decay_gate[:, j] == gate_no),
                                          lam10[j], lam00[j])))
                    lam = lam * lj
                _apply_diag_channel(rho, lam)
                for j in range(n_spec):
                    excited[:, j] &= ~(decay_gate[:, j] == gate_no)

            weights = np.array([w for _, w in branches])
            per_seq[sidx] = float(np.real(
                np.einsum("n,nab,ba->", weights, rho, ket0)))
        survival[li] = per_seq.mean()
        stderr[li] = per_seq.std(ddof=1) / np.sqrt(n_seq) if n_seq > 1 else 0.0
    return RBCurve(lengths=lengths, survival=survival, stderr=stderr,
                   n_seq=n_seq,
                   metadata={"t_gate": t_gate, "frame": frame, "seed": seed,
                             "init": init})
