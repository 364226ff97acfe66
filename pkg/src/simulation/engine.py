"""
Market Simulator
Simulates the coupled process (S, P, X, N): a Brownian efficient price S with
covariance Sigma Sigma^T per unit time, and an event stream whose intensities
depend on y = S - P and on the model state X.

Two schemes are available:

    frozen     intensities frozen at the left end of each substep dt; at most
               one event per substep, placed uniformly inside it
    thinning   windows of length h with a majorant taken over a ball of radius
               4 sigma sqrt(h) around the window's starting y (log-affine only)

Randomness comes from three independent streams spawned from the master seed:
Brownian increments, per-substep acceptance uniforms, and event selection plus
regeneration. S is exogenous, so its increments are drawn in fixed-size blocks
regardless of where events fall.

Example usage:
    model = get_preset("model1").build(get_preset("model1").default_theta())
    result = MarketSimulator(model, SimConfig(horizon=100.0, seed=7)).run()
    result.log.counts()
"""

import logging
from collections import Counter
from typing import List, Optional, Tuple

import numpy as np

from src.errors import ExplosionGuardError, InvalidStateError, ParameterFaultError
from src.lob.transitions import Fill
from src.lob.types import OrderEvent, Side
from src.models.dynamics import Transition
from src.models.intensity import INTENSITY_CEILING, check_rates
from src.models.presets import MarketModel
from src.simulation.state import (
    EventLog,
    EventLogHeader,
    EventRecord,
    MarketState,
    SamplePath,
    SimConfig,
    SimulationResult,
)

BALL_RADIUS = 4.0
MAX_WINDOW_RETRIES = 100
PROBE = 512


class MarketSimulator:
    """
    Seeded simulator of one market path.

    Args:
        model: Market model (intensities, dynamics, volatility)
        config: Simulation settings
    """

    def __init__(self, model: MarketModel, config: Optional[SimConfig] = None):
        self.model = model
        self.config = config or SimConfig()
        self.logger = logging.getLogger("simulation.engine")
        self.intensity = model.intensity
        self.dynamics = model.dynamics
        self.sigma = np.asarray(model.sigma, dtype=float)
        self.ticks = np.asarray(model.ticks, dtype=float)
        self.dim = model.dim
        self.records: List[EventRecord] = []
        self._samples: List[Tuple[float, np.ndarray, np.ndarray]] = []
        self._max_gap = np.zeros(self.dim)
        self._next_sample = 0.0
        self.reset(self.config.seed)

    # ------------------------------------------------------------------
    # setup

    def reset(self, seed: Optional[int] = None) -> MarketState:
        """Fresh random streams and initial state; S_0 = P_0."""
        seed = self.config.seed if seed is None else seed
        self.seed = int(seed)
        s_seq, u_seq, e_seq = np.random.SeedSequence(self.seed).spawn(3)
        self.rng_s = np.random.default_rng(s_seq)
        self.rng_u = np.random.default_rng(u_seq)
        self.rng_e = np.random.default_rng(e_seq)
        x, grid = self.dynamics.initial_state(self.rng_e)
        self.records = []
        self._samples = []
        self._max_gap = np.zeros(self.dim)
        self._next_sample = 0.0
        self.state = MarketState(0.0, self.model.prices(grid), tuple(grid), x, Counter())
        self.initial = self.state.copy()
        return self.state

    def _prices(self, grid) -> np.ndarray:
        return self.ticks * (np.asarray(grid, dtype=float) + 0.5)

    def _rates(self, x, ys: np.ndarray) -> np.ndarray:
        """(m, events + 1) rates; the last column is the state-only jump rate."""
        rates = self.intensity.rates_block(x, ys)
        jump = self.dynamics.state_jump_rate(x)
        out = np.concatenate([rates, np.full((rates.shape[0], 1), jump)], axis=1)
        check_rates(out, f"at t={self.state.t:.6g}")
        return out

    # ------------------------------------------------------------------
    # event application

    def _fire(self, state: MarketState, column: int, t: float) -> MarketState:
        if column == len(self.intensity):
            transition = self.dynamics.state_jump(state.x, state.grid, self.rng_e)
            z = None
        else:
            channel = self.intensity.channels[column]
            transition = self.dynamics.fire(state.x, state.grid, channel, self.rng_e)
            z = channel.name
        new_state = MarketState(t, state.s, transition.p, transition.x, state.counts)
        if z is not None:
            new_state.counts[z] += 1
            if new_state.n_events > self.config.max_events:
                raise ExplosionGuardError(
                    f"More than {self.config.max_events} events by t={t:.6g}; parameters look explosive"
                )
        self._record(new_state, z, transition)
        return new_state

    def _record(self, state: MarketState, z: Optional[str], transition: Transition) -> None:
        self.records.append(
            EventRecord(
                t=float(state.t),
                z=z,
                x=self.dynamics.snapshot(state.x),
                p=tuple(float(v) for v in self._prices(state.grid)),
                detail=transition.detail,
            )
        )

    def _choose(self, rates: np.ndarray) -> int:
        cumulative = np.cumsum(rates)
        return int(np.searchsorted(cumulative, self.rng_e.random() * cumulative[-1], side="right"))

    def inject_order(self, asset: int, event: OrderEvent) -> MarketState:
        """
        Apply an exogenous order to the current book.

        The order goes through the same transition as an endogenous event but is
        not counted in N and is not recorded in the event log.

        Raises:
            IllicitEventError: event not licit in the current book
        """
        if self.dynamics.family != "qr":
            raise InvalidStateError(f"Orders can only be injected into queue-reactive models, not {self.model.preset_id}")
        if not 0 <= asset < self.dim:
            raise InvalidStateError(f"Unknown asset {asset}")
        transition = self.dynamics.inject(self.state.x, self.state.grid, asset, event, self.rng_e)
        self.state = MarketState(self.state.t, self.state.s, transition.p, transition.x, self.state.counts)
        return self.state

    def market_order(self, asset: int, consumed_side: Side, size: int) -> List[Fill]:
        """Multi-unit market order walking the book; returns the fills."""
        if self.dynamics.family != "qr":
            raise InvalidStateError(f"Market orders need a queue-reactive model, not {self.model.preset_id}")
        transition, fills = self.dynamics.market_order(
            self.state.x, self.state.grid, asset, consumed_side, size, self.rng_e
        )
        self.state = MarketState(self.state.t, self.state.s, transition.p, transition.x, self.state.counts)
        return fills

    # ------------------------------------------------------------------
    # sample path

    def _observe(self, times: np.ndarray, s: np.ndarray, grid) -> None:
        """Track max |S - P| and record sample points falling in `times`."""
        if times.size == 0:
            return
        prices = self._prices(grid)
        gaps = np.abs(s - prices).max(axis=0) / self.ticks
        self._max_gap = np.maximum(self._max_gap, gaps)
        interval = self.config.resolved_sample_interval
        while self._next_sample <= times[-1] + 1e-12:
            idx = int(np.searchsorted(times, self._next_sample - 1e-12))
            idx = min(idx, times.size - 1)
            self._samples.append((float(self._next_sample), np.array(s[idx]), prices.copy()))
            self._next_sample += interval

    def sample_path(self) -> SamplePath:
        if not self._samples:
            return SamplePath(np.zeros(0), np.zeros((0, self.dim)), np.zeros((0, self.dim)))
        times, s, p = zip(*self._samples)
        return SamplePath(np.array(times), np.vstack(s), np.vstack(p))

    # ------------------------------------------------------------------
    # frozen-step scheme

    def step_frozen(self, state: MarketState, dt: float) -> MarketState:
        """
        One substep with intensities frozen at the left endpoint.

        With probability 1 - exp(-Lambda_tot dt) one event occurs, its type drawn
        proportionally to the rates and its time uniformly inside the substep.
        """
        if not dt > 0:
            raise ValueError(f"Substep must be > 0, got {dt}")
        y = state.s - self._prices(state.grid)
        rates = self._rates(state.x, y[None, :])[0]
        increment = self.sigma @ self.rng_s.standard_normal(self.dim) * np.sqrt(dt)
        u = self.rng_u.random()
        total = float(rates.sum())
        t_next = state.t + dt
        s_next = state.s + increment
        if total > 0 and u < -np.expm1(-total * dt):
            column = self._choose(rates)
            t_event = state.t + self.rng_e.random() * dt
            state = self._fire(state, column, t_event)
        self._observe(np.array([t_next]), s_next[None, :], state.grid)
        return MarketState(t_next, s_next, state.grid, state.x, state.counts)

    def _run_frozen(self, state: MarketState, t_end: float) -> MarketState:
        dt = self.config.step
        span = t_end - state.t
        n_steps = int(np.ceil(span / dt - 1e-9))
        if n_steps <= 0:
            return state
        t0 = state.t
        edges = t0 + dt * np.arange(n_steps + 1, dtype=float)
        edges[-1] = t_end
        lengths = np.diff(edges)
        chunk = self.config.chunk
        k = 0
        while k < n_steps:
            m = min(chunk, n_steps - k)
            lens = lengths[k:k + m]
            noise = self.rng_s.standard_normal((m, self.dim))
            increments = (noise * np.sqrt(lens)[:, None]) @ self.sigma.T
            right = state.s + np.cumsum(increments, axis=0)
            left = np.vstack([state.s[None, :], right[:-1]])
            uniforms = self.rng_u.random(m)
            j = 0
            while j < m:
                hi = min(m, j + PROBE)
                ys = left[j:hi] - self._prices(state.grid)
                rates = self._rates(state.x, ys)
                total = rates.sum(axis=1)
                prob = -np.expm1(-total * lens[j:hi])
                hits = np.nonzero(uniforms[j:hi] < prob)[0]
                if hits.size == 0:
                    self._observe(edges[k + j + 1:k + hi + 1], right[j:hi], state.grid)
                    j = hi
                    continue
                i = j + int(hits[0])
                self._observe(edges[k + j + 1:k + i + 1], right[j:i], state.grid)
                column = self._choose(rates[i - j])
                t_event = edges[k + i] + self.rng_e.random() * lens[i]
                state = self._fire(state, column, float(t_event))
                self._observe(edges[k + i + 1:k + i + 2], right[i:i + 1], state.grid)
                j = i + 1
            state = MarketState(float(edges[k + m]), right[-1], state.grid, state.x, state.counts)
            k += m
        return state

    # ------------------------------------------------------------------
    # thinning scheme

    def _majorant(self, state: MarketState, h: float) -> Tuple[float, np.ndarray]:
        if not self.intensity.is_log_affine:
            raise ValueError("Thinning needs log-affine intensities; use the frozen scheme")
        intercepts, slopes, active = self.intensity.affine_tables(state.x)
        radius = BALL_RADIUS * np.sqrt(np.diag(self.model.covariance)) * np.sqrt(h)
        y0 = state.s - self._prices(state.grid)
        with np.errstate(over="ignore"):
            sup = np.exp(intercepts + slopes @ y0 + np.abs(slopes) @ radius)
        sup = float(np.sum(sup[active])) + self.dynamics.state_jump_rate(state.x)
        majorant = self.config.safety * sup
        if not np.isfinite(majorant) or majorant > INTENSITY_CEILING * max(len(self.intensity), 1):
            raise ParameterFaultError(f"Thinning majorant overflow at t={state.t:.6g}")
        return majorant, radius

    def step_thinning(self, state: MarketState, h: float) -> MarketState:
        """
        One thinning window of length at most h.

        Returns at the first accepted event, or at the window end when no
        candidate is accepted. A window whose sampled S leaves the ball is
        discarded and drawn again.
        """
        if not h > 0:
            raise ValueError(f"Window must be > 0, got {h}")
        majorant, radius = self._majorant(state, h)
        grid_prices = self._prices(state.grid)
        for attempt in range(MAX_WINDOW_RETRIES):
            elapsed = 0.0
            s = np.array(state.s, dtype=float)
            times, points = [], []
            inside = True
            while True:
                gap = self.rng_e.exponential(1.0 / majorant) if majorant > 0 else np.inf
                window_end = gap >= h - elapsed
                step = h - elapsed if window_end else gap
                s = s + self.sigma @ self.rng_s.standard_normal(self.dim) * np.sqrt(step)
                elapsed += step
                if np.any(np.abs(s - state.s) > radius):
                    inside = False
                    break
                times.append(state.t + elapsed)
                points.append(s.copy())
                if window_end:
                    break
                rates = self._rates(state.x, (s - grid_prices)[None, :])[0]
                total = float(rates.sum())
                if total > majorant:
                    raise ParameterFaultError(f"Intensity {total:.6g} above thinning majorant {majorant:.6g}")
                if self.rng_u.random() * majorant < total:
                    self._observe(np.array(times), np.vstack(points), state.grid)
                    moved = MarketState(state.t + elapsed, s, state.grid, state.x, state.counts)
                    return self._fire(moved, self._choose(rates), moved.t)
            if inside:
                self._observe(np.array(times), np.vstack(points), state.grid)
                return MarketState(state.t + elapsed, s, state.grid, state.x, state.counts)
            self.logger.warning(
                f"Thinning window at t={state.t:.6g} left the ball (attempt {attempt + 1}); re-simulating"
            )
        raise ParameterFaultError(f"Thinning window at t={state.t:.6g} kept leaving the ball")

    def _run_thinning(self, state: MarketState, t_end: float) -> MarketState:
        h = self.config.window
        while state.t < t_end - 1e-12:
            state = self.step_thinning(state, min(h, t_end - state.t))
        state.t = float(t_end) if abs(state.t - t_end) <= 1e-12 else state.t
        return state

    # ------------------------------------------------------------------
    # drivers

    def run_until(self, t_end: float) -> MarketState:
        """Advance the current state to time t_end with the configured scheme."""
        if t_end < self.state.t:
            raise ValueError(f"Cannot run backward from {self.state.t} to {t_end}")
        if self.state.t == 0.0 and not self._samples:
            self._observe(np.array([0.0]), self.state.s[None, :], self.state.grid)
        if self.config.scheme == "frozen":
            self.state = self._run_frozen(self.state, t_end)
        else:
            self.state = self._run_thinning(self.state, t_end)
        return self.state

    def event_log(self) -> EventLog:
        header = EventLogHeader(
            preset_id=self.model.preset_id,
            horizon=float(self.state.t),
            ticks=tuple(float(t) for t in self.ticks),
            p0=tuple(float(v) for v in self._prices(self.initial.grid)),
            x0=self.dynamics.snapshot(self.initial.x),
            theta=dict(self.model.theta),
            options=dict(self.model.options),
            seed=self.seed,
            scheme=self.config.scheme,
        )
        return EventLog(header, list(self.records))

    def run(self, seed: Optional[int] = None) -> SimulationResult:
        """Simulate [0, horizon] from a fresh initial state."""
        self.reset(seed)
        self.logger.info(
            f"Simulating {self.model.preset_id} over T={self.config.horizon} "
            f"({self.config.scheme}, seed={self.seed})"
        )
        self.run_until(self.config.horizon)
        result = SimulationResult(self.event_log(), self.sample_path(), self.state.copy(), self._max_gap.copy())
        self.logger.info(f"Simulation finished with {result.n_events} events and {len(self.records)} records")
        return result


def simulate(model: MarketModel, config: Optional[SimConfig] = None) -> SimulationResult:
    """Simulate one path of `model` under `config`."""
    return MarketSimulator(model, config).run()
