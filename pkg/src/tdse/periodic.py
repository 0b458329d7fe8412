"""Pseudo-spectral marching for the periodic problem on [-pi, pi]^d.

The wavefunction's Fourier coefficients obey an exact one-step recurrence
driven by the potential term; discretizing the update integral with the
trapezoidal rule or an implicit n-step interpolatory rule gives marching
schemes of order 2..8 that all cost one FFT and one inverse FFT per step.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigError, NumericsError
from .problems import ZERO_FIELD

_DIV_GUARD = 1e-14
_HIST_CAP = 11


@lru_cache(maxsize=None)
def _adams_mu_exact(n: int) -> tuple:
    """Implicit interpolatory weights: integral over one step of the degree
    n-1 polynomial through g(t - j dt), j = 0..n-1.  Exact rational solve."""
    if not 1 <= n <= 12:
        raise ConfigError(f"scheme order n={n} outside supported range [1, 12]")
    A = [[Fraction(-j) ** m for j in range(n)] for m in range(n)]
    b = [Fraction(-1) ** m / (m + 1) for m in range(n)]
    # Gaussian elimination over Fractions
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [a - f * c for a, c in zip(A[r], A[col])]
                b[r] = b[r] - f * b[col]
    return tuple(b[i] / A[i][i] for i in range(n))


@dataclass(frozen=True)
class AdamsScheme:
    """Order and weights of the implicit multistep rule; mu[0] multiplies the
    new-time value."""

    n: int
    mu: np.ndarray

    @classmethod
    def of_order(cls, n: int) -> "AdamsScheme":
        exact = _adams_mu_exact(n)
        return cls(n=n, mu=np.array([float(f) for f in exact]))

    @classmethod
    def exact_fractions(cls, n: int) -> tuple:
        return _adams_mu_exact(n)


@dataclass(frozen=True)
class PeriodicState:
    """Solver state between steps: grid values, Fourier coefficients, and the
    most-recent potential-term transforms (newest first)."""

    t: float
    u: np.ndarray
    uhat: np.ndarray
    vu_hats: tuple
    stamps: tuple

    @property
    def history_len(self) -> int:
        return len(self.vu_hats)


class PeriodicSolver:
    """Marching schemes on the uniform M^d grid over [-pi, pi]^d."""

    def __init__(self, M: int, d: int = 1, potential=None, field=None):
        if M <= 0 or M % 2:
            raise ConfigError(f"M={M} must be positive and even")
        if d not in (1, 2):
            raise ConfigError(f"dimension d={d} not supported")
        self.M = M
        self.d = d
        self.potential = potential
        self.field = field if field is not None else ZERO_FIELD
        x1 = -np.pi + 2.0 * np.pi * np.arange(M) / M
        k1 = np.fft.fftfreq(M, d=1.0 / M)
        if d == 1:
            self.grids = (x1,)
            self.k = (k1,)
            self.ksq = k1**2
        else:
            self.grids = (x1, x1)
            self.k = (k1[:, None], k1[None, :])
            self.ksq = k1[:, None] ** 2 + k1[None, :] ** 2
        self.size = M**d
        self.fft_count = 0
        self.ifft_count = 0

    # --- helpers ---

    def _fft(self, u):
        self.fft_count += 1
        return np.fft.fftn(u) / self.size

    def _ifft(self, c):
        self.ifft_count += 1
        return np.fft.ifftn(c) * self.size

    def sample_potential(self, t: float):
        if self.potential is None:
            return None
        if self.d == 1:
            return np.asarray(self.potential(self.grids[0], t=t), dtype=complex)
        X, Y = np.meshgrid(self.grids[0], self.grids[1], indexing="ij")
        return np.asarray(self.potential(X, Y, t=t), dtype=complex)

    def _green_phase(self, t_new: float, lag: float):
        """Per-mode multiplier over [t_new - lag, t_new]."""
        arg = -1j * self.ksq * lag
        for ax in range(self.d):
            dphi = (self.field.phi_component(t_new, ax)
                    - self.field.phi_component(t_new - lag, ax))
            if dphi != 0.0:
                arg = arg + 1j * self.k[ax] * dphi
        return np.exp(arg)

    def initial_state(self, u0: np.ndarray, t0: float = 0.0) -> PeriodicState:
        u0 = np.asarray(u0, dtype=complex)
        uhat = self._fft(u0)
        V = self.sample_potential(t0)
        vu = self._fft(V * u0) if V is not None else np.zeros_like(uhat)
        return PeriodicState(t=t0, u=u0, uhat=uhat, vu_hats=(vu,), stamps=(t0,))

    def _divide(self, w_phys, V_new, coeff):
        if V_new is None:
            return w_phys
        denom = 1.0 + 1j * coeff * V_new
        if np.min(np.abs(denom)) < _DIV_GUARD:
            raise NumericsError(
                "time step resonates with the potential: |1 + i mu0 dt V| below guard")
        return w_phys / denom

    # --- steppers ---

    def step_trapezoidal(self, state: PeriodicState, dt: float) -> PeriodicState:
        t_new = state.t + dt
        w = self._green_phase(t_new, dt) * (state.uhat - 0.5j * dt * state.vu_hats[0])
        V_new = self.sample_potential(t_new)
        u_new = self._divide(self._ifft(w), V_new, 0.5 * dt)
        if V_new is not None:
            vu_new = self._fft(V_new * u_new)
            uhat_new = w - 0.5j * dt * vu_new
        else:
            vu_new = np.zeros_like(w)
            uhat_new = w
        hist = ((vu_new,) + state.vu_hats)[:_HIST_CAP]
        stamps = ((t_new,) + state.stamps)[:_HIST_CAP]
        return PeriodicState(t=t_new, u=u_new, uhat=uhat_new,
                             vu_hats=hist, stamps=stamps)

    def step_adams(self, state: PeriodicState, scheme: AdamsScheme,
                   dt: float) -> PeriodicState:
        n = scheme.n
        if state.history_len < n - 1:
            raise NumericsError(
                f"order-{n} step needs {n - 1} history entries, have {state.history_len}"
                " (startup not performed)")
        t_new = state.t + dt
        S = self._green_phase(t_new, dt) * state.uhat
        for l in range(1, n):
            S = S - 1j * dt * scheme.mu[l] * self._green_phase(t_new, l * dt) \
                * state.vu_hats[l - 1]
        V_new = self.sample_potential(t_new)
        u_new = self._divide(self._ifft(S), V_new, scheme.mu[0] * dt)
        if V_new is not None:
            vu_new = self._fft(V_new * u_new)
            uhat_new = S - 1j * dt * scheme.mu[0] * vu_new
        else:
            vu_new = np.zeros_like(S)
            uhat_new = S
        hist = ((vu_new,) + state.vu_hats)[: n - 1]
        stamps = ((t_new,) + state.stamps)[: n - 1]
        return PeriodicState(t=t_new, u=u_new, uhat=uhat_new,
                             vu_hats=hist, stamps=stamps)

    def richardson_step(self, state: PeriodicState, dt: float, order: int) -> PeriodicState:
        """One step of size dt at the given even order by iterated Richardson
        extrapolation of trapezoidal sub-stepping."""
        if order % 2 or order < 2:
            raise ConfigError(f"Richardson startup order must be even, got {order}")
        levels = order // 2
        approx = []
        for i in range(levels):
            sub = state
            m = 2**i
            for _ in range(m):
                sub = self.step_trapezoidal(sub, dt / m)
            approx.append(sub.u)
        for lev in range(1, levels):
            fac = 4.0**lev
            approx = [(fac * approx[i + 1] - approx[i]) / (fac - 1.0)
                      for i in range(len(approx) - 1)]
        u_ext = approx[0]
        t_new = state.t + dt
        uhat = self._fft(u_ext)
        V_new = self.sample_potential(t_new)
        vu = self._fft(V_new * u_ext) if V_new is not None else np.zeros_like(uhat)
        hist = ((vu,) + state.vu_hats)[:_HIST_CAP]
        stamps = ((t_new,) + state.stamps)[:_HIST_CAP]
        return PeriodicState(t=t_new, u=u_ext, uhat=uhat, vu_hats=hist, stamps=stamps)

    def richardson_startup(self, state: PeriodicState, dt: float, n: int) -> PeriodicState:
        """Produce the n-2 startup steps required before order-n marching."""
        for _ in range(max(0, n - 2)):
            state = self.richardson_step(state, dt, n)
        return PeriodicState(t=state.t, u=state.u, uhat=state.uhat,
                             vu_hats=state.vu_hats[: n - 1], stamps=state.stamps[: n - 1])

    def run(self, u0: np.ndarray, dt: float, steps: int, order: int = 8,
            on_step=None) -> PeriodicState:
        """Startup plus marching for a fixed number of steps."""
        if order < 2:
            raise ConfigError("order must be >= 2")
        scheme = AdamsScheme.of_order(order) if order > 2 else None
        state = self.initial_state(u0)
        if on_step is not None:
            on_step(state)
        nstart = min(steps, max(0, order - 2)) if order > 2 else 0
        for _ in range(nstart):
            state = self.richardson_step(state, dt, order)
            if on_step is not None:
                on_step(state)
        for _ in range(steps - nstart):
            if order == 2:
                state = self.step_trapezoidal(state, dt)
            else:
                state = self.step_adams(state, scheme, dt)
            if on_step is not None:
                on_step(state)
        return state
