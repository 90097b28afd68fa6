"""One full walk step, trajectory runs, and the exact averaged-channel oracle.

A step applies coin, x shift, coin, y shift, then the dephasing kick, so a
trajectory with a fixed phase draw stays a pure state.  The oracle evolves
the full density matrix under the phase-averaged channel instead; it has no
sampling error but scales as the square of the lattice size, so it is only
meant for short walks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import variance_series
from .disorder import DisorderConfig, DisorderMode, PhaseMatrix, PhaseSampler
from .errors import (
    ConfigError,
    InvariantViolationError,
    LatticeOverflowError,
    UnsupportedModeError,
)
from .state import (
    WalkState,
    apply_coin,
    apply_dephasing,
    apply_shift_x,
    apply_shift_y,
    initial_state,
)

_INV_SQRT2 = 1.0 / np.sqrt(2.0)

# a run aborts when the state norm drifts further than this from 1
NORM_DRIFT_LIMIT = 1e-9

# dense density matrices grow as (2 * (2n+1)^2)^2; past this the oracle is
# no longer a sensible tool
MAX_ORACLE_STEPS = 10


def step(state: WalkState, phases: PhaseMatrix) -> WalkState:
    """Advance one full step: coin, x shift, coin, y shift, dephasing."""
    out = apply_coin(state)
    out = apply_shift_x(out)
    out = apply_coin(out)
    out = apply_shift_y(out)
    out = apply_dephasing(out, phases)
    out.step_count = state.step_count + 1
    return out


@dataclass
class TrajectoryResult:
    """Per-step site probabilities of one realization.

    probabilities[n] is the (L, L) grid after n steps, n = 0..steps.
    states is populated only when the run was asked to keep full states.
    """

    probabilities: np.ndarray
    half_width: int
    trajectory_index: int
    states: list[WalkState] | None = None


def run_trajectory(config: DisorderConfig, trajectory_index: int,
                   keep_states: bool = False) -> TrajectoryResult:
    """Run one realization for config.steps steps.

    The grid half width equals config.steps, so the support can never reach
    the boundary.  Aborts with InvariantViolationError if the norm drifts
    by more than NORM_DRIFT_LIMIT.
    """
    n_steps = config.steps
    sampler = PhaseSampler(config, trajectory_index)
    state = initial_state(n_steps)
    size = state.grid_size
    probs = np.empty((n_steps + 1, size, size), dtype=float)
    probs[0] = np.abs(state.amps[..., 0]) ** 2 + np.abs(state.amps[..., 1]) ** 2
    states = [state] if keep_states else None
    for n in range(1, n_steps + 1):
        state = step(state, sampler.phases_for_step(n, state.half_width))
        drift = abs(state.norm() - 1.0)
        if drift > NORM_DRIFT_LIMIT:
            raise InvariantViolationError(
                f"norm drifted by {drift:.3e} at step {n} of trajectory {trajectory_index}"
            )
        probs[n] = np.abs(state.amps[..., 0]) ** 2 + np.abs(state.amps[..., 1]) ** 2
        if keep_states:
            states.append(state)
    return TrajectoryResult(probs, n_steps, trajectory_index, states)


# ---------------------------------------------------------------------------
# exact averaged-channel oracle
# ---------------------------------------------------------------------------

@dataclass
class DensityState:
    """Dense density matrix over the bounded lattice and coin.

    Basis order is site-major, coin-minor: basis index
    ((i + h) * L + (j + h)) * 2 + c with L = 2h + 1 and c = 0 for H,
    1 for V.  rho has shape (2 L^2, 2 L^2).
    """

    rho: np.ndarray
    half_width: int
    step_count: int = 0

    @property
    def grid_size(self) -> int:
        return 2 * self.half_width + 1

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def purity(self) -> float:
        return float(np.vdot(self.rho, self.rho).real)

    def site_probabilities(self) -> np.ndarray:
        """(L, L) grid of p(i, j), the coin-traced diagonal."""
        size = self.grid_size
        diag = self.rho.diagonal().real
        return diag.reshape(size, size, 2).sum(axis=2)


def basis_index(i: int, j: int, coin: int, half_width: int) -> int:
    """Flat basis index of |i, j, coin> in the documented ordering."""
    size = 2 * half_width + 1
    return ((i + half_width) * size + (j + half_width)) * 2 + coin


def density_from_state(state: WalkState) -> DensityState:
    """|psi><psi| of a pure state, in the documented basis order."""
    vec = state.amps.reshape(-1)
    return DensityState(np.outer(vec, vec.conj()), state.half_width, state.step_count)


def initial_density(half_width: int) -> DensityState:
    return density_from_state(initial_state(half_width))


def same_site_coherence_factor(zeta: float) -> float:
    """Average of e^{i phi} over phi ~ Uniform[-zeta, zeta]: sin(zeta)/zeta."""
    return float(np.sinc(zeta / np.pi))


def cross_site_coherence_factor(zeta: float) -> float:
    """Product of two independent averages of e^{+-i phi/2}: (sin(z/2)/(z/2))^2."""
    return float(np.sinc(zeta / (2.0 * np.pi)) ** 2)


def _apply_coin_tensor(t: np.ndarray, coin_axis: int) -> np.ndarray:
    tt = np.moveaxis(t, coin_axis, -1)
    out = np.empty_like(tt)
    out[..., 0] = (tt[..., 0] + tt[..., 1]) * _INV_SQRT2
    out[..., 1] = (tt[..., 0] - tt[..., 1]) * _INV_SQRT2
    return np.moveaxis(out, -1, coin_axis)


def _apply_shift_tensor(t: np.ndarray, site_axis: int, coin_axis: int) -> np.ndarray:
    tt = np.moveaxis(t, (site_axis, coin_axis), (0, 1))
    if tt[0, 0].any() or tt[-1, 1].any():
        raise LatticeOverflowError("shift would move weight past the oracle lattice bound")
    out = np.zeros_like(tt)
    out[:-1, 0] = tt[1:, 0]
    out[1:, 1] = tt[:-1, 1]
    return np.moveaxis(out, (0, 1), (site_axis, coin_axis))


def _damping_tensor(mode: DisorderMode, zeta: float, size: int) -> np.ndarray | None:
    """Elementwise damping D for rho indexed (i, j, s, i', j', s').

    Derived by averaging the dephasing unitary pair over the uniform phase
    law; each closed form is pinned against numerical quadrature in the
    test suite before the oracle is trusted.
    """
    if mode is DisorderMode.NONE or zeta == 0.0:
        return None
    same_coin = same_site_coherence_factor(zeta)
    coin_block = np.array([[1.0, same_coin], [same_coin, 1.0]])
    if mode is DisorderMode.DYNAMICAL_UNIFORM:
        return coin_block.reshape(1, 1, 2, 1, 1, 2)
    if mode is DisorderMode.DYNAMICAL_SPATIAL:
        cross = cross_site_coherence_factor(zeta)
        eye = np.eye(size)
        same_site = eye[:, None, :, None] * eye[None, :, None, :]
        d = np.full((size, size, 2, size, size, 2), cross)
        d += same_site[:, :, None, :, :, None] * (coin_block.reshape(1, 1, 2, 1, 1, 2) - cross)
        return d
    raise UnsupportedModeError(
        f"no step-factorizing phase average exists for mode {mode}; "
        "the exact channel supports none, dynamical-spatial and dynamical-uniform"
    )


def exact_step_density(dstate: DensityState, config: DisorderConfig) -> DensityState:
    """One step of the phase-averaged channel on a density matrix.

    Applies the deterministic unitaries by conjugation, then damps each
    matrix element by the average of its dephasing factor.  Static spatial
    disorder has no such per-step average (the ensemble is correlated in
    time) and is rejected.
    """
    if dstate.step_count + 1 > dstate.half_width:
        raise LatticeOverflowError(
            f"oracle lattice bound {dstate.half_width} cannot hold step {dstate.step_count + 1}"
        )
    damping = _damping_tensor(config.mode, config.zeta, dstate.grid_size)
    return _exact_step_with_damping(dstate, damping)


def _exact_step_with_damping(dstate: DensityState, damping: np.ndarray | None) -> DensityState:
    size = dstate.grid_size
    t = dstate.rho.reshape(size, size, 2, size, size, 2)
    # U rho U^dagger with U = S_Y H S_X H: forward ops on the ket axes,
    # conjugated ops on the bra axes (all four are real, so identical)
    for site_axis, coin_axis in ((0, 2), (3, 5)):
        t = _apply_coin_tensor(t, coin_axis)
        t = _apply_shift_tensor(t, site_axis, coin_axis)
        t = _apply_coin_tensor(t, coin_axis)
        t = _apply_shift_tensor(t, site_axis + 1, coin_axis)
    if damping is not None:
        t = t * damping
    dim = 2 * size * size
    return DensityState(t.reshape(dim, dim), dstate.half_width, dstate.step_count + 1)


@dataclass
class ExactRunResult:
    """Ensemble-exact per-step distributions and variances (no sampling error)."""

    config: DisorderConfig
    probabilities: np.ndarray
    variances: np.ndarray
    half_width: int


def exact_run(config: DisorderConfig, n_max: int | None = None) -> ExactRunResult:
    """Evolve the averaged channel for n_max steps (default config.steps).

    Intended for small lattices only: the density matrix has dimension
    2 (2 n_max + 1)^2, so runs are capped at MAX_ORACLE_STEPS steps.
    """
    n_steps = config.steps if n_max is None else n_max
    if n_steps > MAX_ORACLE_STEPS:
        raise ConfigError(
            f"exact oracle is limited to {MAX_ORACLE_STEPS} steps "
            f"(dense density matrix), got {n_steps}"
        )
    # reject unsupported modes before doing any work
    damping = _damping_tensor(config.mode, config.zeta, 2 * n_steps + 1)
    dstate = initial_density(n_steps)
    size = dstate.grid_size
    probs = np.empty((n_steps + 1, size, size), dtype=float)
    probs[0] = dstate.site_probabilities()
    for n in range(1, n_steps + 1):
        dstate = _exact_step_with_damping(dstate, damping)
        drift = abs(dstate.trace() - 1.0)
        if drift > NORM_DRIFT_LIMIT:
            raise InvariantViolationError(f"trace drifted by {drift:.3e} at oracle step {n}")
        probs[n] = dstate.site_probabilities()
    return ExactRunResult(config, probs, variance_series(probs, n_steps), n_steps)
