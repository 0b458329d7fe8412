"""Fast transforms between the uniform grid on [-1,1]^d and the contour nodes.

Three node families require three methods: A-type (endpoint-correction nodes,
direct summation), C-type (clustered diagonal nodes, direct summation or a
Chebyshev-interpolant contraction), and E-type (equispaced leg nodes, a
shifted-and-scaled FFT).  All transforms here are weightless exponential sums;
quadrature weights and normalization factors are applied by callers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contour import BLOCK_NAMES, GammaQuadrature
from .errors import ConfigError, NumericsError

_BLOCK_TYPE = {"E1": "E", "E3": "E", "A1": "A", "A3": "A", "C": "C"}


def _apply(kernel: np.ndarray, X: np.ndarray, axis: int) -> np.ndarray:
    """Contract kernel (out, in) against X along the given axis."""
    Y = np.tensordot(kernel, X, axes=(1, axis))
    return np.moveaxis(Y, 0, axis)


@dataclass(frozen=True)
class SSFFTPlan:
    """Shifted and scaled FFT: sums c_hat_k = sum_j exp(-i xi_k x_j) c_j for
    x_j = -1 + 2j/m and xi_k = alpha + k*h, via a zero-padded FFT of length nu
    under the resonance condition h/m = pi/nu."""

    m: int
    n: int
    nu: int
    alpha: float
    h: float
    pre_f: np.ndarray = field(repr=False)
    post_f: np.ndarray = field(repr=False)
    pre_i: np.ndarray = field(repr=False)
    post_i: np.ndarray = field(repr=False)

    @property
    def beta(self) -> float:
        return self.alpha + self.n * self.h

    @classmethod
    def build(cls, m: int, n: int, alpha: float, h: float, nu: int) -> "SSFFTPlan":
        if nu < max(m, n):
            raise ConfigError(f"FFT length nu={nu} below max(m, n)={max(m, n)}")
        if abs(np.pi * m / h - nu) > 1e-8 * nu:
            raise ConfigError("resonance condition h/m = pi/nu violated")
        j = np.arange(m)
        k = np.arange(n)
        xi = alpha + k * h
        x = -1.0 + 2.0 * j / m
        return cls(m=m, n=n, nu=nu, alpha=alpha, h=h,
                   pre_f=np.exp(-2j * alpha * j / m),
                   post_f=np.exp(1j * xi),
                   pre_i=np.exp(-1j * k * h),
                   post_i=np.exp(1j * alpha * x))

    def forward(self, c: np.ndarray, axis: int = 0) -> np.ndarray:
        c = np.moveaxis(np.asarray(c, dtype=complex), axis, -1)
        if c.shape[-1] != self.m:
            raise ConfigError(f"input length {c.shape[-1]} != m={self.m}")
        buf = np.zeros(c.shape[:-1] + (self.nu,), dtype=complex)
        buf[..., : self.m] = c * self.pre_f
        out = np.fft.fft(buf, axis=-1)[..., : self.n] * self.post_f
        return np.moveaxis(out, -1, axis)

    def inverse(self, ch: np.ndarray, axis: int = 0) -> np.ndarray:
        ch = np.moveaxis(np.asarray(ch, dtype=complex), axis, -1)
        if ch.shape[-1] != self.n:
            raise ConfigError(f"input length {ch.shape[-1]} != n={self.n}")
        buf = np.zeros(ch.shape[:-1] + (self.nu,), dtype=complex)
        buf[..., : self.n] = ch * self.pre_i
        out = np.fft.ifft(buf, axis=-1)[..., : self.m] * (self.nu * self.post_i)
        return np.moveaxis(out, -1, axis)


def ssfft_forward(plan: SSFFTPlan, c: np.ndarray) -> np.ndarray:
    return plan.forward(c)


def ssfft_inverse(plan: SSFFTPlan, ch: np.ndarray) -> np.ndarray:
    return plan.inverse(ch)


@dataclass(frozen=True)
class ChebPlan:
    """Chebyshev tables for the C-type transforms on the diagonal segment.

    lam[l, j] interpolates exp(-(1+i) tau x_j), rho[j, l] interpolates
    exp(+(1+i) tau x_j) on tau in [-H, H]; tvals[k, l] holds the rescaled
    Chebyshev polynomials at the diagonal node parameters.
    """

    nc: int
    lam: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    tvals: np.ndarray = field(repr=False)
    residual: float = 0.0

    @classmethod
    def build(cls, H: float, x: np.ndarray, tau_c: np.ndarray, eps: float,
              nc_max: int = 4096) -> "ChebPlan":
        nc = int(np.ceil(2 * H)) + 8
        theta_dense = np.linspace(0.0, np.pi, 801)
        tau_dense = H * np.cos(theta_dense)
        while True:
            mm = np.arange(nc)
            theta = np.pi * (mm + 0.5) / nc
            tau = H * np.cos(theta)
            g_minus = np.exp(-(1.0 + 1j) * np.outer(tau, x))   # (nc, M)
            g_plus = 1.0 / g_minus
            # first-kind interpolation via the discrete cosine relation
            C = np.cos(np.outer(mm, theta))                    # (l, m)
            lam = (2.0 / nc) * (C @ g_minus)
            lam[0] *= 0.5
            rho = ((2.0 / nc) * (C @ g_plus))
            rho[0] *= 0.5
            rho = rho.T                                        # (M, nc)
            Td = np.cos(np.outer(theta_dense, mm))             # (dense, l)
            res = max(
                float(np.max(np.abs(Td @ lam - np.exp(-(1.0 + 1j) * np.outer(tau_dense, x))))),
                float(np.max(np.abs((Td @ rho.T) - np.exp((1.0 + 1j) * np.outer(tau_dense, x))))),
            )
            if res <= eps or nc >= nc_max:
                break
            nc *= 2
        if res > eps:
            raise NumericsError(f"Chebyshev plan residual {res:.2e} above eps={eps:g}")
        tvals = np.cos(np.outer(np.arccos(np.clip(tau_c / H, -1.0, 1.0)), mm))
        return cls(nc=nc, lam=lam, rho=rho, tvals=tvals, residual=res)


@dataclass
class TransformPlan1D:
    """Everything needed to transform one dimension: the quadrature, per-leg
    shifted FFT plans, direct kernels for the A and C blocks, and the
    Chebyshev tables when those pay off."""

    quad: GammaQuadrature
    ssfft: dict
    resc_fwd: dict = field(repr=False, default=None)
    resc_inv: dict = field(repr=False, default=None)
    a_fwd: dict = field(repr=False, default=None)
    a_inv: dict = field(repr=False, default=None)
    c_fwd: np.ndarray = field(repr=False, default=None)
    c_inv: np.ndarray = field(repr=False, default=None)
    cheb: ChebPlan = None
    c_direct: bool = True

    @classmethod
    def build(cls, quad: GammaQuadrature, c_mode: str = "auto") -> "TransformPlan1D":
        if c_mode not in ("auto", "direct", "cheb"):
            raise ConfigError(f"unknown C-transform mode {c_mode!r}")
        x = quad.grid
        h, NE, kappa = quad.h, quad.NE, quad.kappa
        nu = 2 * (NE + 2 * kappa - 1)
        alpha3 = quad.H + kappa * h
        alpha1 = -(quad.K - kappa * h)
        ss = {"E3": SSFFTPlan.build(quad.M, NE, alpha3, h, nu),
              "E1": SSFFTPlan.build(quad.M, NE, alpha1, h, nu)}
        resc_fwd = {"E3": np.exp(-quad.H * x), "E1": np.exp(quad.H * x)}
        resc_inv = {"E3": np.exp(quad.H * x), "E1": np.exp(-quad.H * x)}
        a_fwd = {}
        a_inv = {}
        for name in ("A1", "A3"):
            z = quad.block_nodes(name)
            a_fwd[name] = np.exp(-1j * np.outer(z, x))
            a_inv[name] = np.exp(1j * np.outer(x, z))
        tau_c = quad.c_parameters()
        cheb = None
        c_direct = True
        c_fwd = c_inv = None
        if tau_c.size:
            cheb = ChebPlan.build(quad.H, x, tau_c, quad.eps)
            if c_mode == "auto":
                c_direct = tau_c.size <= 4 * cheb.nc
            else:
                c_direct = c_mode == "direct"
            if c_direct:
                zc = quad.block_nodes("C")
                c_fwd = np.exp(-1j * np.outer(zc, x))
                c_inv = np.exp(1j * np.outer(x, zc))
        return cls(quad=quad, ssfft=ss, resc_fwd=resc_fwd, resc_inv=resc_inv,
                   a_fwd=a_fwd, a_inv=a_inv, c_fwd=c_fwd, c_inv=c_inv,
                   cheb=cheb, c_direct=c_direct)

    # --- per-axis block operations (used directly in 1D, batched in 2D) ---

    def _axis_scale(self, X, scale, axis):
        shape = [1] * X.ndim
        shape[axis] = scale.size
        return X * scale.reshape(shape)

    def e_forward(self, leg: str, X: np.ndarray, axis: int = 0) -> np.ndarray:
        return self.ssfft[leg].forward(self._axis_scale(X, self.resc_fwd[leg], axis), axis)

    def e_inverse(self, leg: str, C: np.ndarray, axis: int = 0) -> np.ndarray:
        return self._axis_scale(self.ssfft[leg].inverse(C, axis), self.resc_inv[leg], axis)

    def a_forward(self, name: str, X: np.ndarray, axis: int = 0) -> np.ndarray:
        return _apply(self.a_fwd[name], X, axis)

    def a_inverse(self, name: str, C: np.ndarray, axis: int = 0) -> np.ndarray:
        return _apply(self.a_inv[name], C, axis)

    def c_forward(self, X: np.ndarray, axis: int = 0) -> np.ndarray:
        if self.c_direct:
            return _apply(self.c_fwd, X, axis)
        return _apply(self.cheb.tvals, _apply(self.cheb.lam, X, axis), axis)

    def c_inverse(self, C: np.ndarray, axis: int = 0) -> np.ndarray:
        if self.c_direct:
            return _apply(self.c_inv, C, axis)
        return _apply(self.cheb.rho, _apply(self.cheb.tvals.T, C, axis), axis)


@dataclass
class SpectralCoeffs1D:
    """Complex coefficients aligned index-for-index with the contour nodes."""

    values: np.ndarray
    slices: dict

    @classmethod
    def zeros(cls, quad: GammaQuadrature) -> "SpectralCoeffs1D":
        return cls(values=np.zeros(quad.N, dtype=complex), slices=quad.slices)

    def block(self, name: str) -> np.ndarray:
        return self.values[self.slices[name]]

    def copy(self) -> "SpectralCoeffs1D":
        return SpectralCoeffs1D(values=self.values.copy(), slices=self.slices)


@dataclass
class SpectralCoeffs2D:
    """Coefficients on the tensor-product contour, stored as one (N1, N2)
    array addressable by the 25 block pairs."""

    values: np.ndarray
    slices1: dict
    slices2: dict

    @classmethod
    def zeros(cls, quad1: GammaQuadrature, quad2: GammaQuadrature) -> "SpectralCoeffs2D":
        return cls(values=np.zeros((quad1.N, quad2.N), dtype=complex),
                   slices1=quad1.slices, slices2=quad2.slices)

    def block(self, name1: str, name2: str) -> np.ndarray:
        return self.values[self.slices1[name1], self.slices2[name2]]

    def copy(self) -> "SpectralCoeffs2D":
        return SpectralCoeffs2D(values=self.values.copy(),
                                slices1=self.slices1, slices2=self.slices2)


def forward_1d(plan: TransformPlan1D, f: np.ndarray) -> SpectralCoeffs1D:
    """Weightless forward sums f_hat_k = sum_j exp(-i zeta_k x_j) f_j."""
    f = np.asarray(f, dtype=complex)
    quad = plan.quad
    if f.shape != (quad.M,):
        raise ConfigError(f"expected {quad.M} grid values, got {f.shape}")
    out = SpectralCoeffs1D.zeros(quad)
    for name in ("E1", "E3"):
        out.block(name)[:] = plan.e_forward(name, f)
    for name in ("A1", "A3"):
        out.block(name)[:] = plan.a_forward(name, f)
    if quad.NC:
        out.block("C")[:] = plan.c_forward(f)
    return out


def inverse_1d(plan: TransformPlan1D, coeffs) -> np.ndarray:
    """Weightless inverse sums f_j = sum_k exp(i zeta_k x_j) f_hat_k."""
    values = coeffs.values if isinstance(coeffs, SpectralCoeffs1D) else np.asarray(coeffs)
    quad = plan.quad
    if values.shape != (quad.N,):
        raise ConfigError(f"expected {quad.N} coefficients, got {values.shape}")
    f = np.zeros(quad.M, dtype=complex)
    for name in ("E1", "E3"):
        f += plan.e_inverse(name, values[quad.slices[name]])
    for name in ("A1", "A3"):
        f += plan.a_inverse(name, values[quad.slices[name]])
    if quad.NC:
        f += plan.c_inverse(values[quad.slices["C"]])
    return f


@dataclass
class TransformPlan2D:
    """Tensor-product plan: one 1D plan per dimension plus the joint padded
    2D FFT used for the (E, E) block pairs."""

    plan1: TransformPlan1D
    plan2: TransformPlan1D

    @classmethod
    def build(cls, quad1: GammaQuadrature, quad2: GammaQuadrature,
              c_mode: str = "auto") -> "TransformPlan2D":
        return cls(plan1=TransformPlan1D.build(quad1, c_mode),
                   plan2=TransformPlan1D.build(quad2, c_mode))

    def _ee_forward(self, leg1: str, leg2: str, F: np.ndarray) -> np.ndarray:
        p1, p2 = self.plan1, self.plan2
        s1, s2 = p1.ssfft[leg1], p2.ssfft[leg2]
        Y = F * np.outer(p1.resc_fwd[leg1] * s1.pre_f, p2.resc_fwd[leg2] * s2.pre_f)
        buf = np.zeros((s1.nu, s2.nu), dtype=complex)
        buf[: s1.m, : s2.m] = Y
        G = np.fft.fft2(buf)[: s1.n, : s2.n]
        return G * np.outer(s1.post_f, s2.post_f)

    def _ee_inverse(self, leg1: str, leg2: str, C: np.ndarray) -> np.ndarray:
        p1, p2 = self.plan1, self.plan2
        s1, s2 = p1.ssfft[leg1], p2.ssfft[leg2]
        buf = np.zeros((s1.nu, s2.nu), dtype=complex)
        buf[: s1.n, : s2.n] = C * np.outer(s1.pre_i, s2.pre_i)
        G = np.fft.ifft2(buf)[: s1.m, : s2.m] * (s1.nu * s2.nu)
        return G * np.outer(p1.resc_inv[leg1] * s1.post_i, p2.resc_inv[leg2] * s2.post_i)


def _forward_block(p2: TransformPlan2D, b1: str, b2: str, F: np.ndarray) -> np.ndarray:
    t1, t2 = _BLOCK_TYPE[b1], _BLOCK_TYPE[b2]
    pl1, pl2 = p2.plan1, p2.plan2
    if t1 == "E" and t2 == "E":
        return p2._ee_forward(b1, b2, F)
    if t1 == "A":
        # correction-node transform taken as the inner transform
        T = pl1.a_forward(b1, F, axis=0)
        if t2 == "A":
            return pl2.a_forward(b2, T, axis=1)
        if t2 == "E":
            return pl2.e_forward(b2, T, axis=1)
        return pl2.c_forward(T, axis=1)
    if t2 == "A":
        T = pl2.a_forward(b2, F, axis=1)
        if t1 == "E":
            return pl1.e_forward(b1, T, axis=0)
        return pl1.c_forward(T, axis=0)
    if t1 == "C" and t2 == "C":
        if pl1.c_direct or pl2.c_direct:
            return pl2.c_forward(pl1.c_forward(F, axis=0), axis=1)
        T = _apply(pl2.cheb.lam, _apply(pl1.cheb.lam, F, 0), 1)
        return _apply(pl2.cheb.tvals, _apply(pl1.cheb.tvals, T, 0), 1)
    # mixed C/E: interpolant contraction, then the leg FFT, then evaluation
    if t1 == "C":
        if pl1.c_direct:
            return pl2.e_forward(b2, pl1.c_forward(F, axis=0), axis=1)
        T = _apply(pl1.cheb.lam, F, 0)
        T = pl2.e_forward(b2, T, axis=1)
        return _apply(pl1.cheb.tvals, T, 0)
    if pl2.c_direct:
        return pl1.e_forward(b1, pl2.c_forward(F, axis=1), axis=0)
    T = _apply(pl2.cheb.lam, F, 1)
    T = pl1.e_forward(b1, T, axis=0)
    return _apply(pl2.cheb.tvals, T, 1)


def _inverse_block(p2: TransformPlan2D, b1: str, b2: str, C: np.ndarray) -> np.ndarray:
    t1, t2 = _BLOCK_TYPE[b1], _BLOCK_TYPE[b2]
    pl1, pl2 = p2.plan1, p2.plan2
    if t1 == "E" and t2 == "E":
        return p2._ee_inverse(b1, b2, C)
    if t1 == "A":
        # reversed ordering: the non-correction transform goes innermost
        if t2 == "E":
            T = pl2.e_inverse(b2, C, axis=1)
        elif t2 == "C":
            T = pl2.c_inverse(C, axis=1)
        else:
            T = pl2.a_inverse(b2, C, axis=1)
        return pl1.a_inverse(b1, T, axis=0)
    if t2 == "A":
        if t1 == "E":
            T = pl1.e_inverse(b1, C, axis=0)
        else:
            T = pl1.c_inverse(C, axis=0)
        return pl2.a_inverse(b2, T, axis=1)
    if t1 == "C" and t2 == "C":
        if pl1.c_direct or pl2.c_direct:
            return pl1.c_inverse(pl2.c_inverse(C, axis=1), axis=0)
        T = _apply(pl2.cheb.tvals.T, _apply(pl1.cheb.tvals.T, C, 0), 1)
        return _apply(pl2.cheb.rho, _apply(pl1.cheb.rho, T, 0), 1)
    if t1 == "C":
        if pl1.c_direct:
            return pl1.c_inverse(pl2.e_inverse(b2, C, axis=1), axis=0)
        T = _apply(pl1.cheb.tvals.T, C, 0)
        T = pl2.e_inverse(b2, T, axis=1)
        return _apply(pl1.cheb.rho, T, 0)
    if pl2.c_direct:
        return pl2.c_inverse(pl1.e_inverse(b1, C, axis=0), axis=1)
    T = _apply(pl2.cheb.tvals.T, C, 1)
    T = pl1.e_inverse(b1, T, axis=0)
    return _apply(pl2.cheb.rho, T, 1)


def forward_2d(p2: TransformPlan2D, F: np.ndarray) -> SpectralCoeffs2D:
    """All 25 block pairs of the tensor-product forward transform."""
    F = np.asarray(F, dtype=complex)
    q1, q2 = p2.plan1.quad, p2.plan2.quad
    if F.shape != (q1.M, q2.M):
        raise ConfigError(f"expected grid shape {(q1.M, q2.M)}, got {F.shape}")
    out = SpectralCoeffs2D.zeros(q1, q2)
    for b1 in BLOCK_NAMES:
        if q1.slices[b1].start == q1.slices[b1].stop:
            continue
        for b2 in BLOCK_NAMES:
            if q2.slices[b2].start == q2.slices[b2].stop:
                continue
            out.block(b1, b2)[:] = _forward_block(p2, b1, b2, F)
    return out


def inverse_2d(p2: TransformPlan2D, coeffs) -> np.ndarray:
    """Sum of the 25 block-pair contributions of the inverse transform."""
    values = coeffs.values if isinstance(coeffs, SpectralCoeffs2D) else np.asarray(coeffs)
    q1, q2 = p2.plan1.quad, p2.plan2.quad
    if values.shape != (q1.N, q2.N):
        raise ConfigError(f"expected coefficient shape {(q1.N, q2.N)}, got {values.shape}")
    F = np.zeros((q1.M, q2.M), dtype=complex)
    for b1 in BLOCK_NAMES:
        s1 = q1.slices[b1]
        if s1.start == s1.stop:
            continue
        for b2 in BLOCK_NAMES:
            s2 = q2.slices[b2]
            if s2.start == s2.stop:
                continue
            F += _inverse_block(p2, b1, b2, values[s1, s2])
    return F


# --- dense reference implementations (test oracles) ---

def dense_forward_1d(quad: GammaQuadrature, f: np.ndarray) -> np.ndarray:
    """Literal evaluation of the forward sums via the full kernel matrix."""
    return np.exp(-1j * np.outer(quad.nodes, quad.grid)) @ np.asarray(f, dtype=complex)


def dense_inverse_1d(quad: GammaQuadrature, fh: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.outer(quad.grid, quad.nodes)) @ np.asarray(fh, dtype=complex)


def dense_forward_2d(quad1: GammaQuadrature, quad2: GammaQuadrature,
                     F: np.ndarray) -> np.ndarray:
    K1 = np.exp(-1j * np.outer(quad1.nodes, quad1.grid))
    K2 = np.exp(-1j * np.outer(quad2.nodes, quad2.grid))
    return K1 @ np.asarray(F, dtype=complex) @ K2.T


def dense_inverse_2d(quad1: GammaQuadrature, quad2: GammaQuadrature,
                     C: np.ndarray) -> np.ndarray:
    K1 = np.exp(1j * np.outer(quad1.grid, quad1.nodes))
    K2 = np.exp(1j * np.outer(quad2.grid, quad2.nodes))
    return K1 @ np.asarray(C, dtype=complex) @ K2.T
