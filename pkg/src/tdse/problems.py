"""Problem definitions: pulse fields, Gaussian well potentials, the exact
free wavepacket solution, and ground-state initial conditions."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.integrate
import scipy.interpolate
import scipy.linalg

from .errors import ConfigError, NumericsError


@dataclass(frozen=True)
class FieldSpec:
    """sin^2-envelope pulse A(t) = A0 sin^2(pi t / T) cos(omega t) on [0, T].

    The antiderivative phi is evaluated in closed form.  In 2D the field acts
    along a single axis (``axis``); the other component is zero.
    """

    A0: float
    omega: float
    T: float
    axis: int = 0

    def A(self, t):
        t = np.asarray(t, dtype=float)
        return self.A0 * np.sin(np.pi * t / self.T) ** 2 * np.cos(self.omega * t)

    def phi(self, t):
        """Exact antiderivative of A on [0, T]; phi(0) = 0.

        sin^2(pi t/T) cos(w t) splits into cos(w t)/2 and two shifted
        cosines at w +- 2 pi / T; each integrates to a sinusoid, with the
        resonant w = 2 pi / T limit handled separately.
        """
        t = np.asarray(t, dtype=float)
        if self.A0 == 0.0:
            return np.zeros_like(t)
        w = self.omega
        a = 2.0 * np.pi / self.T

        def sint_over(wk):
            # antiderivative of cos(wk s) from 0 to t
            if abs(wk) < 1e-12:
                return t
            return np.sin(wk * t) / wk

        out = 0.5 * sint_over(w) - 0.25 * sint_over(w + a) - 0.25 * sint_over(w - a)
        return self.A0 * out

    def phi_component(self, t, axis: int):
        if axis == self.axis:
            return self.phi(t)
        return np.zeros_like(np.asarray(t, dtype=float))


class CallbackField:
    """Field given by an arbitrary callable A(t); phi by adaptive quadrature
    with results memoized at previously requested times."""

    def __init__(self, A, axis: int = 0):
        self._A = A
        self.axis = axis
        self._cache = {0.0: 0.0}

    def A(self, t):
        return self._A(t)

    def _phi_scalar(self, t: float) -> float:
        if t in self._cache:
            return self._cache[t]
        t0 = max((s for s in self._cache if s <= t), default=0.0)
        val, _ = scipy.integrate.quad(self._A, t0, t, epsabs=1e-14, epsrel=1e-12,
                                      limit=400)
        out = self._cache[t0] + val
        self._cache[t] = out
        return out

    def phi(self, t):
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return self._phi_scalar(float(t))
        return np.array([self._phi_scalar(float(s)) for s in np.asarray(t)])

    def phi_component(self, t, axis: int):
        if axis == self.axis:
            return self.phi(t)
        return np.zeros_like(np.asarray(t, dtype=float))


ZERO_FIELD = FieldSpec(A0=0.0, omega=1.0, T=1.0)


@dataclass(frozen=True)
class GaussianWell:
    """Static attractive well V(x) = -V0 exp(-|x|^2 / (2 beta^2)), any dimension."""

    V0: float
    beta: float

    def __call__(self, *coords, t=0.0):
        r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
        return -self.V0 * np.exp(-r2 / (2.0 * self.beta**2))

    def l2_norm(self, d: int = 1) -> float:
        """||V||_2 over R^d, used for contour-height selection."""
        return self.V0 * (np.sqrt(np.pi) * self.beta) ** (d / 2.0)


@dataclass(frozen=True)
class MovingPeriodicGaussianWell:
    """2pi-periodic extension of a Gaussian well translating at speed c."""

    V0: float
    beta: float
    c: float = 0.0

    def __call__(self, x, t=0.0):
        y = np.asarray(x, dtype=float) - self.c * t
        y = np.mod(y + np.pi, 2.0 * np.pi) - np.pi
        out = np.zeros_like(y)
        for k in (-1, 0, 1):
            out += np.exp(-((y - 2.0 * np.pi * k) ** 2) / (2.0 * self.beta**2))
        return -self.V0 * out


@dataclass(frozen=True)
class WavepacketParams:
    sigma: float
    k0: float = 0.0


def wavepacket(params: WavepacketParams, x, t):
    """Exact free-particle Gaussian wavepacket solution."""
    if params.sigma <= 0:
        raise ConfigError("wavepacket width must be positive")
    s = params.sigma
    k0 = params.k0
    denom = s**2 + 2j * np.asarray(t)
    return (s * np.sqrt(s) / (np.pi**0.25 * np.sqrt(denom))
            * np.exp(-((np.asarray(x) / np.sqrt(2.0) - 1j * s * k0 / 2.0) ** 2) / denom
                     - k0**2 / 4.0))


def wavepacket_advected(params: WavepacketParams, fld, x, t):
    """Closed-form solution with a uniform field: the free packet evaluated at
    the advected position x + phi(t)."""
    return wavepacket(params, np.asarray(x) + fld.phi(t), t)


def wavepacket_transform(params: WavepacketParams, zeta):
    """Entire continuation of the wavepacket's t=0 Fourier transform."""
    s = params.sigma
    k0 = params.k0
    zeta = np.asarray(zeta)
    return (np.sqrt(2.0 * np.pi) * s**1.5 / np.pi**0.25
            * np.exp(-s**2 * zeta**2 / 2.0 + s * k0 * zeta / np.sqrt(2.0) - k0**2 / 4.0))


@dataclass(frozen=True)
class GroundStateResult:
    eigenvalue: float
    eigenvector: np.ndarray
    residual: float
    grid: np.ndarray


def _fourier_kinetic(M: int, length: float) -> np.ndarray:
    """Dense pseudospectral -d2/dx2 on a uniform periodic grid of M points."""
    k = np.fft.fftfreq(M, d=1.0 / M) * (2.0 * np.pi / length)
    row = np.real(np.fft.ifft(k**2))
    idx = (np.arange(M)[:, None] - np.arange(M)[None, :]) % M
    return row[idx]


def ground_state(potential, domain=(-np.pi, np.pi), M_eig: int = 1024,
                 t: float = 0.0) -> GroundStateResult:
    """Lowest eigenpair of -d2/dx2 + V on a periodic embedding of ``domain``.

    Dense Hermitian solve on a Fourier pseudospectral discretization; the
    potential must have decayed below the target accuracy at the domain edge.
    """
    a, b = domain
    length = b - a
    x = a + length * np.arange(M_eig) / M_eig
    V = np.asarray(potential(x, t=t), dtype=float)
    H = _fourier_kinetic(M_eig, length) + np.diag(V)
    evals, evecs = scipy.linalg.eigh(H, subset_by_index=[0, 0])
    E = float(evals[0])
    u = evecs[:, 0]
    dx = length / M_eig
    u = u / np.sqrt(np.sum(np.abs(u) ** 2) * dx)
    res = float(np.linalg.norm(H @ u - E * u) * np.sqrt(dx))
    if res > 1e-9:
        raise NumericsError(f"ground-state residual {res:.2e} above 1e-9")
    return GroundStateResult(eigenvalue=E, eigenvector=u, residual=res, grid=x)


def resample_trig(gs: GroundStateResult, x_out: np.ndarray) -> np.ndarray:
    """Evaluate the periodic eigenvector's trigonometric interpolant at
    arbitrary points (spectrally accurate)."""
    M = gs.grid.size
    length = (gs.grid[-1] - gs.grid[0]) * M / (M - 1)
    coeff = np.fft.fft(gs.eigenvector) / M
    k = np.fft.fftfreq(M, d=1.0 / M) * (2.0 * np.pi / length)
    phase = np.exp(1j * np.outer(np.asarray(x_out) - gs.grid[0], k))
    return np.real(phase @ coeff)


def ground_state_radial(potential, R: float = 3.0, m_r: int = 4096) -> GroundStateResult:
    """Lowest radially-symmetric eigenpair of -laplacian + V(r) in 2D.

    Conservative finite differences for u'' + u'/r on a staggered grid
    (regular at r=0, Dirichlet at r=R), symmetrized and solved as a
    tridiagonal eigenproblem; Richardson extrapolation of the eigenvalue
    over two grids removes the leading O(dr^2) error.
    """
    def solve(m):
        dr = R / m
        r = (np.arange(m) + 0.5) * dr
        r_half_up = r + 0.5 * dr
        r_half_dn = r - 0.5 * dr
        # symmetrized via D = diag(sqrt(r)): off-diagonal -r_{i+1/2}/sqrt(r_i r_{i+1})
        diag = (r_half_up + r_half_dn) / r / dr**2 + np.asarray(potential(r))
        off = -r_half_up[:-1] / np.sqrt(r[:-1] * r[1:]) / dr**2
        evals, evecs = scipy.linalg.eigh_tridiagonal(
            diag, off, select="i", select_range=(0, 0))
        u = evecs[:, 0] / np.sqrt(r)  # undo symmetrization
        nrm = np.sqrt(np.sum(np.abs(u) ** 2 * r) * dr * 2.0 * np.pi)
        return float(evals[0]), r, u / nrm

    E1, r1, u1 = solve(m_r // 2)
    E2, r2, u2 = solve(m_r)
    E = (4.0 * E2 - E1) / 3.0
    res = abs(E2 - E1) / 3.0  # Richardson error estimate for the eigenvalue
    return GroundStateResult(eigenvalue=E, eigenvector=u2, residual=res, grid=r2)


def radial_to_cartesian(gs: GroundStateResult, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Map a radial profile onto a 2D tensor grid by cubic interpolation,
    renormalized to unit L2 mass on that grid."""
    r_ext = np.concatenate([[0.0], gs.grid])
    u_ext = np.concatenate([[gs.eigenvector[0]], gs.eigenvector])
    spline = scipy.interpolate.CubicSpline(r_ext, u_ext, bc_type=((1, 0.0), "not-a-knot"))
    RR = np.hypot(x[:, None], y[None, :])
    U = np.where(RR <= gs.grid[-1], spline(RR), 0.0)
    dx = x[1] - x[0]
    dy = y[1] - y[0]
    return U / np.sqrt(np.sum(np.abs(U) ** 2) * dx * dy)


def ionization_fraction(u: np.ndarray, box_halfwidth: float = 1.0) -> float:
    """Probability mass that has left the computational box: 1 minus the
    left-endpoint-rule interior mass."""
    u = np.asarray(u)
    M = u.shape[0]
    cell = (2.0 * box_halfwidth / M) ** u.ndim
    return float(1.0 - np.sum(np.abs(u) ** 2) * cell)
