"""Construction of the deformed frequency contour and its quadrature rule.

The inverse Fourier transform is deformed onto a three-segment path: a
horizontal leg at height +H (negative real parts), a diagonal segment through
the origin at angle -pi/4, and a horizontal leg at height -H (positive real
parts).  On the horizontal legs we use an endpoint-corrected trapezoidal rule
(corrections only at the inner end; the integrand has decayed at the outer
truncation).  On the diagonal we use composite Gauss panels dyadically refined
toward the origin.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericsError

EPS_MACH = float(np.finfo(np.float64).eps)

BLOCK_NAMES = ("E1", "A1", "C", "A3", "E3")

# Endpoint-correction tables for the hybrid Gauss-trapezoidal rule of order
# 2p.  The p nodes/weights satisfy the Euler-Maclaurin moment conditions
#   sum_k w_k x_k^m = B_{m+1}(kappa)/(m+1),  m = 0..2p-1,
# (B = Bernoulli polynomial), solved once at 60-digit precision and frozen.
# kappa is the number of omitted regular nodes; h = (b-a)/(n + 2*kappa - 1).
_ALPERT_TABLES = {
    2: (
        2,
        (0.2245784979812613936265, 1.013719374359164138288),
        (0.5540781643606371937957, 0.9459218356393628062043),
    ),
    4: (
        4,
        (0.1967602438183434595604, 0.9418350019929198247317,
         1.965203367854090684299, 2.997478343847041729694),
        (0.4935039628575082904987, 0.9428061348804102897956,
         1.053597404168490630186, 1.01009249809359078952),
    ),
    8: (
        7,
        (0.09811761953716494459361, 0.5030225801568810436123,
         1.177343761843767565438, 2.040342947399114668846,
         3.003391852694064549575, 3.999519979744410183942,
         4.999921139726787075128, 5.9999984429958998526),
        (0.2501843285561235734628, 0.551110758587802979209,
         0.7837008206663482406654, 0.9269830825297908490884,
         0.9875980230216355339232, 1.000190430120415497655,
         1.00022434934912641333, 1.000008207168756912666),
    ),
}


@dataclass(frozen=True)
class AlpertRule:
    """Endpoint corrections turning the trapezoidal rule into an order-2p rule.

    ``nodes`` and ``weights`` are in units of the regular grid spacing h;
    ``kappa`` regular nodes are omitted next to each corrected endpoint.
    """

    p: int
    kappa: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f, a: float, b: float, n: int) -> complex:
        """Integrate a smooth callable on [a, b] with n regular nodes and
        corrections at both endpoints."""
        h = (b - a) / (n + 2 * self.kappa - 1)
        regular = a + (self.kappa + np.arange(n)) * h
        s = np.sum(self.weights * f(a + self.nodes * h))
        s += np.sum(f(regular))
        s += np.sum(self.weights * f(b - self.nodes * h))
        return h * s

    def integrate_decayed(self, f, a: float, b: float, n: int) -> complex:
        """Left-corrected variant: the right correction is dropped, valid when
        f has decayed below the target accuracy before b."""
        h = (b - a) / (n + 2 * self.kappa - 1)
        regular = a + (self.kappa + np.arange(n)) * h
        return h * (np.sum(self.weights * f(a + self.nodes * h)) + np.sum(f(regular)))


def alpert_rule(p: int) -> AlpertRule:
    """Return the embedded endpoint-correction rule of order 2p (p in {2,4,8})."""
    if p not in _ALPERT_TABLES:
        raise ConfigError(f"no correction table for p={p}; supported: {sorted(_ALPERT_TABLES)}")
    kappa, nodes, weights = _ALPERT_TABLES[p]
    return AlpertRule(p=p, kappa=kappa,
                      nodes=np.array(nodes), weights=np.array(weights))


def gauss_legendre(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1].

    Newton iteration on the three-term Legendre recurrence from Chebyshev
    initial guesses; exact for polynomials up to degree 2q-1.
    """
    if not 1 <= q <= 64:
        raise ConfigError(f"Gauss order q={q} outside supported range [1, 64]")
    if q == 1:
        return np.zeros(1), np.full(1, 2.0)
    x = np.cos(np.pi * (np.arange(q) + 0.75) / (q + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for k in range(2, q + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        # p1 = P_q, p0 = P_{q-1}; derivative from the standard identity
        dp = q * (x * p1 - p0) / (x**2 - 1.0)
        dx = p1 / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        raise NumericsError("Gauss-Legendre Newton iteration did not converge")
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, q + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = q * (x * p1 - p0) / (x**2 - 1.0)
    w = 2.0 / ((1.0 - x**2) * dp**2)
    order = np.argsort(x)
    return x[order], w[order]


def select_H(eps: float, Vnorm: float = 0.0, phimax: float = 0.0, d: int = 1) -> float:
    """Contour half-height balancing oscillation damping against the
    exponential amplification of roundoff on the deformed path."""
    if d not in (1, 2):
        raise ConfigError(f"dimension d={d} not supported (1 or 2)")
    if phimax < 0:
        raise ConfigError("quiver radius must be nonnegative")
    arg = eps / ((1.0 + Vnorm) * EPS_MACH)
    if arg <= 1.0:
        raise ConfigError(
            f"requested accuracy eps={eps:g} unattainable at this precision "
            f"(eps must exceed (1+Vnorm)*machine epsilon = {(1 + Vnorm) * EPS_MACH:g})")
    return float(np.log(arg) / (2.0 * d * (1.0 + phimax)))


def quiver_radius(fld, T: float, samples: int = 10_000) -> float:
    """Maximum advective excursion max_t |phi(t)| on [0, T], phi = integral of A.

    Dense uniform sampling including both endpoints; used only for parameter
    sizing, so slight overestimation is harmless.
    """
    if fld is None:
        return 0.0
    t = np.linspace(0.0, T, samples + 1)
    phi = fld.phi(t)
    return float(np.max(np.abs(phi)))


@dataclass(frozen=True)
class ContourConfig:
    """Knobs determining the contour truncation and quadrature rule.

    eps     relative accuracy target
    M       physical grid points (per dimension)
    NE      equispaced nodes per horizontal leg
    p       endpoint-correction order parameter (order 2p)
    q       Gauss order per diagonal panel
    nr      dyadic refinement depth (>= 0; 0 leaves the diagonal block empty)
    phimax  quiver radius of the applied field
    Vnorm   max-in-time L2 norm of the scalar potential
    d       spatial dimension of the overall problem (sets the H balance)
    """

    eps: float
    M: int
    NE: int
    p: int = 8
    q: int = 10
    nr: int = 2
    phimax: float = 0.0
    Vnorm: float = 0.0
    d: int = 1

    def validate(self) -> None:
        if self.M <= 0 or self.M % 2 != 0:
            raise ConfigError(f"M={self.M} must be positive and even")
        if self.NE <= self.M // 2:
            raise ConfigError(f"NE={self.NE} must exceed M/2={self.M // 2}")
        if self.p not in _ALPERT_TABLES:
            raise ConfigError(f"unsupported correction order p={self.p}")
        if self.q < 1 or self.q > 64:
            raise ConfigError(f"Gauss order q={self.q} outside [1, 64]")
        if self.nr < 0:
            raise ConfigError(f"refinement depth nr={self.nr} must be >= 0")
        if self.eps <= EPS_MACH:
            raise ConfigError(f"eps={self.eps:g} at or below machine epsilon")


@dataclass(frozen=True)
class GammaQuadrature:
    """Discretized contour: nodes, weights, and all shape parameters.

    Nodes are stored concatenated in left-to-right contour order
    (E1, A1, C, A3, E3); ``slices`` addresses the five blocks.
    """

    H: float
    K: float
    h: float
    M: int
    NE: int
    p: int
    kappa: int
    q: int
    nr: int
    eps: float
    nodes: np.ndarray
    weights: np.ndarray
    panel_edges: np.ndarray
    slices: dict = field(repr=False, default=None)

    @property
    def N(self) -> int:
        return self.nodes.size

    @property
    def NC(self) -> int:
        return 2 * self.nr * self.q

    def block(self, name: str) -> slice:
        return self.slices[name]

    def block_nodes(self, name: str) -> np.ndarray:
        return self.nodes[self.slices[name]]

    def block_weights(self, name: str) -> np.ndarray:
        return self.weights[self.slices[name]]

    @property
    def grid(self) -> np.ndarray:
        """The uniform physical grid x_j = -1 + 2(j-1)/M this rule pairs with."""
        return -1.0 + 2.0 * np.arange(self.M) / self.M

    def c_parameters(self) -> np.ndarray:
        """Real diagonal parameters tau of the C-block nodes (zeta = (1-i) tau)."""
        return np.real(self.block_nodes("C"))


def build_quadrature(cfg: ContourConfig) -> GammaQuadrature:
    """Assemble the composite rule on the truncated contour from a config."""
    cfg.validate()
    H = select_H(cfg.eps, cfg.Vnorm, cfg.phimax, cfg.d)
    K = H + np.pi * cfg.M / 2.0
    rule = alpert_rule(cfg.p)
    kappa = rule.kappa
    h = (K - H) / (cfg.NE + 2 * kappa - 1)

    # right leg [H, K] at height -iH: corrections at the inner end, regular
    # grid from H + kappa*h to K - kappa*h, right correction dropped (the
    # integrand is below the accuracy target past the truncation)
    tau_A3 = H + rule.nodes * h
    tau_E3 = H + (kappa + np.arange(cfg.NE)) * h
    z_A3 = tau_A3 - 1j * H
    z_E3 = tau_E3 - 1j * H
    w_A3 = (rule.weights * h).astype(complex)
    w_E3 = np.full(cfg.NE, h, dtype=complex)

    # left leg by mirror symmetry
    z_A1 = -z_A3[::-1]
    w_A1 = w_A3[::-1].copy()
    z_E1 = -z_E3[::-1]
    w_E1 = w_E3[::-1].copy()

    # diagonal block: dyadic Gauss panels on [0, H], mirrored to [-H, 0];
    # zeta = (1-i) tau carries the (1-i) path factor into the weights
    gx, gw = gauss_legendre(cfg.q)
    edges_pos = np.array([0.0] + [H / 2.0 ** (cfg.nr - k) for k in range(1, cfg.nr + 1)])
    tau_C_pos = []
    w_C_pos = []
    for a, b in zip(edges_pos[:-1], edges_pos[1:]):
        tau_C_pos.append((b - a) / 2.0 * gx + (a + b) / 2.0)
        w_C_pos.append((b - a) / 2.0 * gw)
    if cfg.nr > 0:
        tau_C_pos = np.concatenate(tau_C_pos)
        w_C_pos = np.concatenate(w_C_pos)
        tau_C = np.concatenate([-tau_C_pos[::-1], tau_C_pos])
        w_C = np.concatenate([w_C_pos[::-1], w_C_pos])
    else:
        tau_C = np.zeros(0)
        w_C = np.zeros(0)
    z_C = (1.0 - 1j) * tau_C
    w_Cz = (1.0 - 1j) * w_C
    panel_edges = np.concatenate([-edges_pos[:0:-1], edges_pos])

    nodes = np.concatenate([z_E1, z_A1, z_C, z_A3, z_E3])
    weights = np.concatenate([w_E1, w_A1, w_Cz, w_A3, w_E3])
    sizes = (cfg.NE, cfg.p, tau_C.size, cfg.p, cfg.NE)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    slices = {name: slice(int(offsets[i]), int(offsets[i + 1]))
              for i, name in enumerate(BLOCK_NAMES)}

    return GammaQuadrature(H=H, K=K, h=h, M=cfg.M, NE=cfg.NE, p=cfg.p,
                           kappa=kappa, q=cfg.q, nr=cfg.nr, eps=cfg.eps,
                           nodes=nodes, weights=weights,
                           panel_edges=panel_edges, slices=slices)
