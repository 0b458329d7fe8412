"""Free-space marching on [-1,1]^d via coefficients on the deformed contour.

The solver state holds grid values inside the box and spectral coefficients
at the contour nodes; coefficients evolve by the one-step recurrence (never
by transforming u, whose support leaves the box), so no artificial boundary
conditions are involved.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .contour import ContourConfig, GammaQuadrature, build_quadrature
from .errors import ConfigError, NumericsError
from .periodic import AdamsScheme, _DIV_GUARD, _HIST_CAP
from .problems import ZERO_FIELD
from .xform import (TransformPlan1D, TransformPlan2D, forward_1d, forward_2d,
                    inverse_1d, inverse_2d)


@dataclass(frozen=True)
class FreeState:
    """Grid values, contour coefficients, and the potential-term transform
    history (newest first; transforms stored with the trapezoid factor)."""

    t: float
    u: np.ndarray
    uhat: np.ndarray
    vu_hats: tuple
    stamps: tuple

    @property
    def history_len(self) -> int:
        return len(self.vu_hats)


class FreeSolver:
    """Trapezoidal and implicit multistep marching over the contour modes."""

    def __init__(self, cfg, potential=None, field=None, c_mode: str = "auto"):
        cfgs = (cfg,) if isinstance(cfg, ContourConfig) else tuple(cfg)
        if len(cfgs) not in (1, 2):
            raise ConfigError("one contour config per dimension (d = 1 or 2)")
        self.d = len(cfgs)
        self.cfgs = cfgs
        self.quads = tuple(build_quadrature(c) for c in cfgs)
        if self.d == 1:
            self.plan = TransformPlan1D.build(self.quads[0], c_mode)
        else:
            self.plan = TransformPlan2D.build(self.quads[0], self.quads[1], c_mode)
        self.potential = potential
        self.field = field if field is not None else ZERO_FIELD
        self.grids = tuple(q.grid for q in self.quads)
        self.trap = float(np.prod([2.0 / q.M for q in self.quads]))
        if self.d == 1:
            self.zsq = self.quads[0].nodes ** 2          # complex square
            self.wq = self.quads[0].weights / (2.0 * np.pi)
        else:
            z1, z2 = self.quads[0].nodes, self.quads[1].nodes
            self.zsq = z1[:, None] ** 2 + z2[None, :] ** 2
            self.wq = np.outer(self.quads[0].weights, self.quads[1].weights) \
                / (2.0 * np.pi) ** 2
        self._prop_cache = {}
        self.forward_count = 0
        self.inverse_count = 0

    # --- transforms with the marching conventions applied ---

    def forward_scaled(self, f: np.ndarray) -> np.ndarray:
        """Forward transform including the (2/M)^d trapezoid factor."""
        self.forward_count += 1
        if self.d == 1:
            return self.trap * forward_1d(self.plan, f).values
        return self.trap * forward_2d(self.plan, f).values

    def inverse_weighted(self, coeffs: np.ndarray) -> np.ndarray:
        """Grid values of the weighted inverse transform (1/2pi)^d sum w c."""
        self.inverse_count += 1
        if self.d == 1:
            return inverse_1d(self.plan, self.wq * coeffs)
        return inverse_2d(self.plan, self.wq * coeffs)

    # --- problem sampling ---

    def sample_potential(self, t: float):
        if self.potential is None:
            return None
        if self.d == 1:
            return np.asarray(self.potential(self.grids[0], t=t), dtype=complex)
        X, Y = np.meshgrid(self.grids[0], self.grids[1], indexing="ij")
        return np.asarray(self.potential(X, Y, t=t), dtype=complex)

    def green_phase(self, t_new: float, lag: float) -> np.ndarray:
        """Spectral propagator over [t_new - lag, t_new] at every node pair;
        uses the complex square zeta . zeta, not |zeta|^2."""
        key = round(lag, 15)
        base = self._prop_cache.get(key)
        if base is None:
            base = np.exp(-1j * self.zsq * lag)
            self._prop_cache[key] = base
        out = base
        for ax in range(self.d):
            dphi = (self.field.phi_component(t_new, ax)
                    - self.field.phi_component(t_new - lag, ax))
            if dphi != 0.0:
                ph = np.exp(1j * self.quads[ax].nodes * dphi)
                if self.d == 1:
                    out = out * ph
                else:
                    out = out * (ph[:, None] if ax == 0 else ph[None, :])
        return out

    # --- initialization ---

    def init_state(self, u0: np.ndarray, t0: float = 0.0) -> FreeState:
        """Transform compactly supported initial data; rejects data that has
        not decayed at the box boundary (silent aliasing otherwise)."""
        u0 = np.asarray(u0, dtype=complex)
        expect = tuple(q.M for q in self.quads)
        if u0.shape != (expect if self.d == 2 else (expect[0],)):
            raise ConfigError(f"u0 shape {u0.shape} does not match grid {expect}")
        eps = max(c.eps for c in self.cfgs)
        V0 = self.sample_potential(t0)
        for name, f in (("u0", u0),) + ((("V", V0),) if V0 is not None else ()):
            scale = float(np.max(np.abs(f)))
            if scale == 0.0:
                continue
            boundary = np.abs(f[0]) if self.d == 1 else max(
                float(np.max(np.abs(f[0, :]))), float(np.max(np.abs(f[:, 0]))))
            if boundary > np.sqrt(eps) * scale:
                raise ConfigError(
                    f"{name} is not numerically supported in the box: boundary "
                    f"magnitude {boundary:.2e} vs sqrt(eps)*max = {np.sqrt(eps) * scale:.2e}")
        uhat = self.forward_scaled(u0)
        vu = self.forward_scaled(V0 * u0) if V0 is not None else np.zeros_like(uhat)
        return FreeState(t=t0, u=u0, uhat=uhat, vu_hats=(vu,), stamps=(t0,))

    def _divide(self, w_phys, V_new, coeff):
        if V_new is None:
            return w_phys
        denom = 1.0 + 1j * coeff * V_new
        if np.min(np.abs(denom)) < _DIV_GUARD:
            raise NumericsError(
                "time step resonates with the potential: |1 + i mu0 dt V| below guard")
        return w_phys / denom

    # --- steppers ---

    def step_trapezoidal(self, state: FreeState, dt: float) -> FreeState:
        t_new = state.t + dt
        w = self.green_phase(t_new, dt) * (state.uhat - 0.5j * dt * state.vu_hats[0])
        V_new = self.sample_potential(t_new)
        u_new = self._divide(self.inverse_weighted(w), V_new, 0.5 * dt)
        if V_new is not None:
            vu_new = self.forward_scaled(V_new * u_new)
            uhat_new = w - 0.5j * dt * vu_new
        else:
            vu_new = np.zeros_like(w)
            uhat_new = w
        return FreeState(t=t_new, u=u_new, uhat=uhat_new,
                         vu_hats=((vu_new,) + state.vu_hats)[:_HIST_CAP],
                         stamps=((t_new,) + state.stamps)[:_HIST_CAP])

    def step_adams(self, state: FreeState, scheme: AdamsScheme, dt: float) -> FreeState:
        n = scheme.n
        if state.history_len < n - 1:
            raise NumericsError(
                f"order-{n} step needs {n - 1} history entries, have {state.history_len}"
                " (startup not performed)")
        t_new = state.t + dt
        S = self.green_phase(t_new, dt) * state.uhat
        for l in range(1, n):
            S = S - 1j * dt * scheme.mu[l] * self.green_phase(t_new, l * dt) \
                * state.vu_hats[l - 1]
        V_new = self.sample_potential(t_new)
        u_new = self._divide(self.inverse_weighted(S), V_new, scheme.mu[0] * dt)
        if V_new is not None:
            vu_new = self.forward_scaled(V_new * u_new)
            uhat_new = S - 1j * dt * scheme.mu[0] * vu_new
        else:
            vu_new = np.zeros_like(S)
            uhat_new = S
        return FreeState(t=t_new, u=u_new, uhat=uhat_new,
                         vu_hats=((vu_new,) + state.vu_hats)[:_HIST_CAP],
                         stamps=((t_new,) + state.stamps)[:_HIST_CAP])

    def richardson_step(self, state: FreeState, dt: float, order: int) -> FreeState:
        """Single startup step: the extrapolation tableau is applied to both
        the grid values and the spectral coefficients; the potential-term
        transform is regenerated from the extrapolated grid values."""
        if order % 2 or order < 2:
            raise ConfigError(f"Richardson startup order must be even, got {order}")
        levels = order // 2
        us = []
        cs = []
        for i in range(levels):
            sub = state
            m = 2**i
            for _ in range(m):
                sub = self.step_trapezoidal(sub, dt / m)
            us.append(sub.u)
            cs.append(sub.uhat)
        for lev in range(1, levels):
            fac = 4.0**lev
            us = [(fac * us[i + 1] - us[i]) / (fac - 1.0) for i in range(len(us) - 1)]
            cs = [(fac * cs[i + 1] - cs[i]) / (fac - 1.0) for i in range(len(cs) - 1)]
        t_new = state.t + dt
        V_new = self.sample_potential(t_new)
        vu = self.forward_scaled(V_new * us[0]) if V_new is not None \
            else np.zeros_like(cs[0])
        return FreeState(t=t_new, u=us[0], uhat=cs[0],
                         vu_hats=((vu,) + state.vu_hats)[:_HIST_CAP],
                         stamps=((t_new,) + state.stamps)[:_HIST_CAP])

    def richardson_startup(self, state: FreeState, dt: float, n: int) -> FreeState:
        for _ in range(max(0, n - 2)):
            state = self.richardson_step(state, dt, n)
        return FreeState(t=state.t, u=state.u, uhat=state.uhat,
                         vu_hats=state.vu_hats[: n - 1], stamps=state.stamps[: n - 1])

    def run(self, u0: np.ndarray, dt: float, steps: int, order: int = 8,
            on_step=None) -> FreeState:
        if order < 2:
            raise ConfigError("order must be >= 2")
        scheme = AdamsScheme.of_order(order) if order > 2 else None
        state = self.init_state(u0)
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

    # --- evaluation outside the box ---

    def evaluate_exterior(self, state: FreeState, x, R_ext: float = 4.0) -> np.ndarray:
        """Evaluate u at points beyond [-1,1] from the resolved coefficients.

        The rule is refined (factor ceil(R_ext) on the leg node count, capped
        Gauss order on the panels) so the plane waves exp(i zeta x) stay
        resolved out to |x| <= R_ext, and the coefficients are carried to the
        refined nodes by local polynomial interpolation along each block.
        """
        if self.d != 1:
            raise ConfigError("exterior evaluation is implemented for d=1")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if np.max(np.abs(x)) > R_ext:
            raise ConfigError(f"evaluation point beyond configured radius {R_ext}")
        quad = self.quads[0]
        factor = max(1, int(np.ceil(R_ext)))
        rcfg = dataclasses.replace(self.cfgs[0], NE=quad.NE * factor,
                                   q=min(64, quad.q * factor))
        rquad = build_quadrature(rcfg)
        vals = _interp_contour(quad, rquad, state.uhat)
        kern = np.exp(1j * np.outer(x, rquad.nodes))
        return (kern * rquad.weights) @ vals / (2.0 * np.pi)


def _local_barycentric(xd: np.ndarray, yd: np.ndarray, xt: np.ndarray,
                       win: int = 12) -> np.ndarray:
    """Piecewise polynomial interpolation on a sliding window of data points."""
    win = min(win, xd.size)
    out = np.empty(xt.size, dtype=complex)
    wcache = {}
    pos = np.searchsorted(xd, xt)
    for i, (t, p) in enumerate(zip(xt, pos)):
        lo = min(max(p - win // 2, 0), xd.size - win)
        if lo not in wcache:
            xs = xd[lo:lo + win]
            bw = np.empty(win)
            for k in range(win):
                bw[k] = 1.0 / np.prod(xs[k] - np.delete(xs, k))
            wcache[lo] = bw
        xs = xd[lo:lo + win]
        bw = wcache[lo]
        diff = t - xs
        hit = np.where(diff == 0.0)[0]
        if hit.size:
            out[i] = yd[lo + hit[0]]
        else:
            r = bw / diff
            out[i] = np.sum(r * yd[lo:lo + win]) / np.sum(r)
    return out


def _interp_contour(quad: GammaQuadrature, rquad: GammaQuadrature,
                    values: np.ndarray) -> np.ndarray:
    """Carry coefficients from one rule to a refined rule on the same contour."""
    out = np.empty(rquad.N, dtype=complex)
    for a_name, e_name in (("A1", "E1"), ("A3", "E3")):
        tau = np.concatenate([np.real(quad.block_nodes(a_name)),
                              np.real(quad.block_nodes(e_name))])
        val = np.concatenate([values[quad.slices[a_name]], values[quad.slices[e_name]]])
        order = np.argsort(tau)
        tau, val = tau[order], val[order]
        for name in (a_name, e_name):
            tgt = np.real(rquad.block_nodes(name))
            out[rquad.slices[name]] = _local_barycentric(tau, val, tgt)
    if quad.NC:
        tau = quad.c_parameters()
        val = values[quad.slices["C"]]
        tgt = rquad.c_parameters()
        res = np.empty(tgt.size, dtype=complex)
        # panel-by-panel: the refined rule shares the dyadic panel edges
        for a, b in zip(quad.panel_edges[:-1], quad.panel_edges[1:]):
            src = (tau >= a - 1e-15) & (tau <= b + 1e-15)
            dst = (tgt >= a - 1e-15) & (tgt <= b + 1e-15)
            res[dst] = _local_barycentric(tau[src], val[src], tgt[dst],
                                          win=min(quad.q, src.sum()))
        out[rquad.slices["C"]] = res
    return out
