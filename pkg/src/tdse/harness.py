"""Experiment drivers: error metrics, configuration, convergence sweeps,
preset experiments, and machine-readable outputs."""
from __future__ import annotations

import dataclasses
import json
import struct
import time
from dataclasses import dataclass, field

import numpy as np

from . import problems
from .contour import ContourConfig, build_quadrature, quiver_radius
from .errors import ConfigError
from .freespace import FreeSolver
from .periodic import PeriodicSolver
from .problems import (FieldSpec, GaussianWell, MovingPeriodicGaussianWell,
                       WavepacketParams, ground_state, ground_state_radial,
                       ionization_fraction, radial_to_cartesian, resample_trig,
                       wavepacket, wavepacket_advected)

SNAPSHOT_MAGIC = b"TDSESNAP"
SNAPSHOT_VERSION = 1


# --- metrics ---

def l2_error(u: np.ndarray, u_ref: np.ndarray, L: float) -> float:
    """Left-endpoint-rule L2 distance on the uniform grid over [-L, L]^d."""
    u = np.asarray(u)
    u_ref = np.asarray(u_ref)
    if u.shape != u_ref.shape:
        raise ConfigError(f"grid mismatch: {u.shape} vs {u_ref.shape}")
    cell = np.prod([2.0 * L / m for m in u.shape])
    return float(np.sqrt(np.sum(np.abs(u - u_ref) ** 2) * cell))


@dataclass
class ErrorReport:
    """Rows of (t, E(t)) plus every tunable needed to re-run the experiment."""

    rows: list
    metadata: dict = field(default_factory=dict)

    @property
    def emax(self) -> float:
        return max((e for _, e in self.rows), default=0.0)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,E\n")
            for t, e in self.rows:
                fh.write(f"{t!r},{e!r}\n")

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump({"metadata": self.metadata,
                       "rows": [[t, e] for t, e in self.rows],
                       "emax": self.emax}, fh, indent=2, default=str)


# --- snapshot binary format ---

def write_snapshot(path, t: float, u: np.ndarray) -> None:
    """magic+version (16 bytes), uint32 d, d x uint32 M, float64 t, then
    row-major interleaved (re, im) float64 little-endian grid values."""
    u = np.ascontiguousarray(u, dtype=complex)
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<II", SNAPSHOT_VERSION, 0))
        fh.write(struct.pack("<I", u.ndim))
        fh.write(struct.pack(f"<{u.ndim}I", *u.shape))
        fh.write(struct.pack("<d", t))
        inter = np.empty(u.shape + (2,), dtype="<f8")
        inter[..., 0] = u.real
        inter[..., 1] = u.imag
        inter.tofile(fh)


def read_snapshot(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != SNAPSHOT_MAGIC:
            raise ConfigError(f"not a snapshot file: bad magic {magic!r}")
        version, _ = struct.unpack("<II", fh.read(8))
        if version != SNAPSHOT_VERSION:
            raise ConfigError(f"unsupported snapshot version {version}")
        (d,) = struct.unpack("<I", fh.read(4))
        shape = struct.unpack(f"<{d}I", fh.read(4 * d))
        (t,) = struct.unpack("<d", fh.read(8))
        data = np.fromfile(fh, dtype="<f8", count=2 * int(np.prod(shape)))
        data = data.reshape(shape + (2,))
        return t, (data[..., 0] + 1j * data[..., 1])


def dump_quadrature_csv(quad, path) -> None:
    """CSV of the contour rule: block, re(zeta), im(zeta), re(w), im(w)."""
    with open(path, "w") as fh:
        fh.write("block,re_zeta,im_zeta,re_w,im_w\n")
        for name in ("E1", "A1", "C", "A3", "E3"):
            z = quad.block_nodes(name)
            w = quad.block_weights(name)
            for zk, wk in zip(z, w):
                fh.write(f"{name},{zk.real!r},{zk.imag!r},{wk.real!r},{wk.imag!r}\n")


# --- configuration ---

_CONFIG_FIELDS = {
    "solver", "d", "M", "steps", "T", "order", "preset", "potential", "field",
    "initial", "eps", "NE", "h", "p", "q", "nr", "reference", "ref_refine",
    "snapshot_every", "out", "serial",
}


@dataclass
class ExperimentConfig:
    solver: str = "free"
    d: int = 1
    M: int = 100
    steps: int = 1000
    T: float = 0.5
    order: int = 8
    preset: str = None
    potential: dict = None
    field: dict = None
    initial: dict = None
    eps: float = 1e-10
    NE: object = None
    h: object = None
    p: int = 8
    q: int = 10
    nr: int = 1
    reference: str = "none"
    ref_refine: int = 4
    snapshot_every: int = 0
    out: str = None
    serial: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        unknown = set(data) - _CONFIG_FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.solver not in ("periodic", "free"):
            raise ConfigError(f"solver must be 'periodic' or 'free', got {self.solver!r}")
        if self.d not in (1, 2):
            raise ConfigError(f"d={self.d} unsupported")
        if self.M <= 0 or self.M % 2:
            raise ConfigError(f"M={self.M} must be positive and even")
        if self.steps <= 0 or self.T <= 0:
            raise ConfigError("steps and T must be positive")
        if self.reference not in ("none", "analytic", "self"):
            raise ConfigError(f"unknown reference policy {self.reference!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # --- problem assembly ---

    def build_field(self):
        if not self.field:
            return None
        f = dict(self.field)
        return FieldSpec(A0=f["A0"], omega=f["omega"], T=f.get("T", self.T),
                         axis=f.get("axis", 0))

    def build_potential(self):
        if not self.potential:
            return None
        p = dict(self.potential)
        kind = p.pop("kind")
        if kind == "zero":
            return None
        if kind == "gaussian_well":
            return GaussianWell(V0=p["V0"], beta=p["beta"])
        if kind == "moving_periodic_gaussian_well":
            return MovingPeriodicGaussianWell(V0=p["V0"], beta=p["beta"],
                                              c=p.get("c", 0.0))
        raise ConfigError(f"unknown potential kind {kind!r}")

    def contour_configs(self, potential, fld):
        """Per-dimension contour configs; the quiver radius enters only the
        field-carrying axis and the potential norm is shared."""
        Vnorm = potential.l2_norm(self.d) if isinstance(potential, GaussianWell) else 0.0
        kappa = {2: 2, 4: 4, 8: 7}[self.p]
        cfgs = []
        for ax in range(self.d):
            phimax = 0.0
            if fld is not None and ax == getattr(fld, "axis", 0):
                phimax = quiver_radius(fld, self.T)
            NE = _per_axis(self.NE, ax)
            hval = _per_axis(self.h, ax)
            if NE is None:
                if hval is not None:
                    NE = max(self.M // 2 + 1,
                             int(round(np.pi * self.M / (2.0 * hval))) - (2 * kappa - 1))
                else:
                    NE = 2 * self.M
            cfgs.append(ContourConfig(eps=self.eps, M=self.M, NE=int(NE), p=self.p,
                                      q=self.q, nr=self.nr, phimax=phimax,
                                      Vnorm=Vnorm, d=self.d))
        return tuple(cfgs)

    def build_initial(self, solver_kind, grids, potential):
        init = dict(self.initial or {"kind": "wavepacket", "sigma": 0.1})
        kind = init.pop("kind")
        if kind == "wavepacket":
            params = WavepacketParams(sigma=init.get("sigma", 0.1),
                                      k0=init.get("k0", 0.0))
            if self.d == 1:
                return wavepacket(params, grids[0], 0.0), params
            X, Y = np.meshgrid(grids[0], grids[1], indexing="ij")
            return (wavepacket(params, X, 0.0) * wavepacket(params, Y, 0.0)), params
        if kind == "ground_state":
            if potential is None:
                raise ConfigError("ground_state initial data requires a potential")
            if self.d == 1:
                gs = ground_state(potential, M_eig=init.get("M_eig", 1024))
                if solver_kind == "periodic":
                    u0 = resample_trig(gs, grids[0])
                else:
                    u0 = resample_trig(gs, grids[0])
                dx = grids[0][1] - grids[0][0]
                u0 = u0 / np.sqrt(np.sum(np.abs(u0) ** 2) * dx)
                return u0.astype(complex), gs
            gs = ground_state_radial(lambda r: potential(r), R=init.get("R", 3.0))
            return radial_to_cartesian(gs, grids[0], grids[1]).astype(complex), gs
        raise ConfigError(f"unknown initial kind {kind!r}")


def _per_axis(value, ax):
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return value[ax]
    return value


# --- runners ---

def _reference_fn(config: ExperimentConfig, params, fld):
    """Closed-form reference for field-free or advected wavepackets."""
    if config.reference != "analytic":
        return None
    if not isinstance(params, WavepacketParams):
        raise ConfigError("analytic reference requires a wavepacket initial condition")

    def ref(grids, t):
        shift = fld.phi(t) if fld is not None else 0.0
        if config.d == 1:
            return wavepacket(params, grids[0] + shift, t)
        X, Y = np.meshgrid(grids[0], grids[1], indexing="ij")
        ax = getattr(fld, "axis", 0) if fld is not None else 0
        sx = shift if ax == 0 else 0.0
        sy = shift if ax == 1 else 0.0
        return wavepacket(params, X + sx, t) * wavepacket(params, Y + sy, t)

    return ref


def run_free(config: ExperimentConfig, collect_times=None):
    """March the free-space solver; returns (report, final_state, solver)."""
    fld = config.build_field()
    potential = config.build_potential()
    cfgs = config.contour_configs(potential, fld)
    solver = FreeSolver(cfgs if config.d == 2 else cfgs[0],
                        potential=potential, field=fld)
    u0, params = config.build_initial("free", solver.grids, potential)
    dt = config.T / config.steps
    ref = _reference_fn(config, params, fld)
    rows = []
    saved = {}

    def on_step(state):
        if ref is not None:
            rows.append((state.t, l2_error(state.u, ref(solver.grids, state.t), 1.0)))
        if collect_times is not None:
            for tc in collect_times:
                if abs(state.t - tc) < 0.25 * dt:
                    saved[tc] = state.u.copy()

    t0 = time.perf_counter()
    final = solver.run(u0, dt, config.steps, order=config.order, on_step=on_step)
    wall = time.perf_counter() - t0
    meta = config.to_dict()
    meta.update(wall_seconds=wall, steps_per_second=config.steps / max(wall, 1e-12),
                H=[q.H for q in solver.quads], N=[q.N for q in solver.quads],
                h=[q.h for q in solver.quads])
    report = ErrorReport(rows=rows, metadata=meta)
    if collect_times is not None:
        return report, final, solver, saved
    return report, final, solver


def run_periodic(config: ExperimentConfig, collect_times=None):
    """March the periodic solver; returns (report, final_state, solver)."""
    fld = config.build_field()
    potential = config.build_potential()
    solver = PeriodicSolver(config.M, d=config.d, potential=potential, field=fld)
    u0, params = config.build_initial("periodic", solver.grids, potential)
    dt = config.T / config.steps
    rows = []
    saved = {}

    def on_step(state):
        if collect_times is not None:
            for tc in collect_times:
                if abs(state.t - tc) < 0.25 * dt:
                    saved[tc] = state.u.copy()

    t0 = time.perf_counter()
    final = solver.run(u0, dt, config.steps, order=config.order, on_step=on_step)
    wall = time.perf_counter() - t0
    meta = config.to_dict()
    meta.update(wall_seconds=wall, steps_per_second=config.steps / max(wall, 1e-12))
    report = ErrorReport(rows=rows, metadata=meta)
    if collect_times is not None:
        return report, final, solver, saved
    return report, final, solver


def run_config(config: ExperimentConfig):
    return run_free(config) if config.solver == "free" else run_periodic(config)


# --- convergence sweeps ---

@dataclass
class SweepRow:
    param: float
    E: float
    observed_order: float
    wall_seconds: float
    steps_per_second: float


def sweep_to_csv(rows, path) -> None:
    with open(path, "w") as fh:
        fh.write("param,E,observed_order,wall_seconds,steps_per_second\n")
        for r in rows:
            oo = "" if np.isnan(r.observed_order) else repr(r.observed_order)
            fh.write(f"{r.param!r},{r.E!r},{oo},{r.wall_seconds!r},{r.steps_per_second!r}\n")


def convergence_sweep(config: ExperimentConfig, steps_list) -> list:
    """Error at T for each step count, measured against the configured
    reference (closed form, or a self-converged run at ref_refine x the
    finest step count)."""
    steps_list = sorted(steps_list)
    runner = run_free if config.solver == "free" else run_periodic

    ref_u = None
    if config.reference == "self":
        ref_cfg = dataclasses.replace(config, steps=steps_list[-1] * config.ref_refine,
                                      reference="none")
        _, ref_final, _ = runner(ref_cfg)
        ref_u = ref_final.u
    rows = []
    L = 1.0 if config.solver == "free" else np.pi
    prev = None
    for steps in steps_list:
        cfg = dataclasses.replace(config, steps=steps,
                                  reference=config.reference
                                  if config.reference == "analytic" else "none")
        t0 = time.perf_counter()
        report, final, solver = runner(cfg)
        wall = time.perf_counter() - t0
        if ref_u is not None:
            E = l2_error(final.u, ref_u, L)
        elif config.reference == "analytic":
            E = report.rows[-1][1] if report.rows else np.nan
        else:
            raise ConfigError("convergence sweep needs reference 'self' or 'analytic'")
        order = np.nan
        if prev is not None and E > 0 and prev[1] > 0:
            order = np.log(prev[1] / E) / np.log(steps / prev[0])
        rows.append(SweepRow(param=steps, E=E, observed_order=order,
                             wall_seconds=wall,
                             steps_per_second=steps / max(wall, 1e-12)))
        prev = (steps, E)
    return rows


def observed_orders(rows) -> list:
    return [r.observed_order for r in rows[1:]]


# --- preset experiments ---

EXAMPLE_NAMES = ("example1", "example2a", "example2b", "example2c", "example2d",
                 "example3", "example4")


def example1_config(c: float = 15.0, M: int = 256, steps: int = 200) -> ExperimentConfig:
    return ExperimentConfig(
        solver="periodic", d=1, M=M, steps=steps, T=2.0 * np.pi / 15.0, order=8,
        potential={"kind": "moving_periodic_gaussian_well", "V0": 300.0,
                   "beta": 0.2, "c": c},
        initial={"kind": "ground_state"}, reference="self")


def example3_config(omega: float = 100.0, M: int = 100, steps: int = 2000,
                    h: float = 0.5, eps: float = 1e-10, nr: int = 1,
                    q: int = 10) -> ExperimentConfig:
    return ExperimentConfig(
        solver="free", d=1, M=M, steps=steps, T=0.5, order=8,
        potential={"kind": "gaussian_well", "V0": 1400.0, "beta": 0.1},
        field={"A0": 100.0, "omega": omega, "T": 0.5},
        initial={"kind": "ground_state"},
        eps=eps, h=h, q=q, nr=nr, reference="none")


def example4_config(omega: float = 100.0, M: int = 100, steps: int = 1000,
                    h1: float = 1.4, h2: float = 1.6, eps: float = 1e-5,
                    q: int = 10, nr: int = 1) -> ExperimentConfig:
    return ExperimentConfig(
        solver="free", d=2, M=M, steps=steps, T=0.5, order=8,
        potential={"kind": "gaussian_well", "V0": 1400.0, "beta": 0.1},
        field={"A0": 100.0, "omega": omega, "T": 0.5, "axis": 0},
        initial={"kind": "ground_state"},
        eps=eps, h=(h1, h2), q=q, nr=nr, reference="none")


def _wavepacket_quadrature_emax(eps, M, NE, q, nr, sigma=0.1, A0=0.0,
                                omega=500.0, T=0.1, nt=40) -> float:
    """Max L2 error of the exactly-propagated wavepacket against the closed
    form: isolates contour truncation + quadrature error (no time stepping)."""
    fld = FieldSpec(A0=A0, omega=omega, T=T) if A0 else None
    phimax = quiver_radius(fld, T) if fld else 0.0
    cfg = ExperimentConfig(solver="free", d=1, M=M, steps=nt, T=T, order=2,
                           eps=eps, NE=NE, q=q, nr=nr,
                           field={"A0": A0, "omega": omega, "T": T} if A0 else None,
                           initial={"kind": "wavepacket", "sigma": sigma},
                           reference="analytic")
    report, _, _ = run_free(cfg)
    return report.emax


def run_example(name: str, outdir=".", scale: float = 1.0) -> dict:
    """Reproduce a preset experiment at desk scale; writes CSV artifacts and
    returns the headline numbers."""
    import os
    os.makedirs(outdir, exist_ok=True)
    results = {"name": name}
    if name == "example1":
        steps_list = [int(s * scale) for s in (200, 400, 800, 1600, 3200)]
        cfg = example1_config()
        rows = convergence_sweep(cfg, steps_list)
        sweep_to_csv(rows, os.path.join(outdir, "example1_dt_sweep.csv"))
        results["orders"] = observed_orders(rows)
        results["rows"] = [(r.param, r.E) for r in rows]
    elif name in ("example2a", "example2c"):
        amps = [0.0, 500.0, 1500.0, 3500.0] if name == "example2a" else [0.0]
        sigmas = [0.1] if name == "example2a" else [0.1, 0.05, 0.025]
        table = {}
        for A0 in amps:
            for sigma in sigmas:
                errs = [( M, _wavepacket_quadrature_emax(1e-14, M, NE=768, q=20,
                                                         nr=3, sigma=sigma, A0=A0))
                        for M in (32, 48, 64, 80, 96)]
                table[(A0, sigma)] = errs
        results["table"] = {str(k): v for k, v in table.items()}
        with open(os.path.join(outdir, f"{name}_M_sweep.csv"), "w") as fh:
            fh.write("A0,sigma,M,Emax\n")
            for (A0, sigma), errs in table.items():
                for M, e in errs:
                    fh.write(f"{A0!r},{sigma!r},{M},{e!r}\n")
    elif name in ("example2b", "example2d"):
        amps = [0.0, 500.0, 1500.0] if name == "example2b" else [0.0]
        sigmas = [0.1] if name == "example2b" else [0.1, 0.05, 0.025]
        table = {}
        for A0 in amps:
            for sigma in sigmas:
                errs = []
                for NE in (48, 64, 96, 128, 192, 256, 384):
                    quad = build_quadrature(ContourConfig(
                        eps=1e-14, M=80, NE=NE, q=20, nr=3))
                    errs.append((quad.h, _wavepacket_quadrature_emax(
                        1e-14, 80, NE=NE, q=20, nr=3, sigma=sigma, A0=A0)))
                table[(A0, sigma)] = errs
        results["table"] = {str(k): v for k, v in table.items()}
        with open(os.path.join(outdir, f"{name}_h_sweep.csv"), "w") as fh:
            fh.write("A0,sigma,h,Emax\n")
            for (A0, sigma), errs in table.items():
                for h, e in errs:
                    fh.write(f"{A0!r},{sigma!r},{h!r},{e!r}\n")
    elif name == "example3":
        fractions = {}
        for omega in (100.0, 200.0):
            cfg = example3_config(omega=omega, steps=int(4000 * scale) or 1000, h=0.35)
            _, final, solver = run_free(cfg)
            fractions[omega] = ionization_fraction(final.u)
        results["ionization"] = fractions
        steps_list = [int(s * scale) for s in (1000, 2000, 4000, 8000)]
        cfg = dataclasses.replace(example3_config(omega=100.0, h=0.5),
                                  reference="self", ref_refine=2)
        rows = convergence_sweep(cfg, steps_list)
        sweep_to_csv(rows, os.path.join(outdir, "example3_dt_sweep.csv"))
        results["orders"] = observed_orders(rows)
        with open(os.path.join(outdir, "example3_ionization.csv"), "w") as fh:
            fh.write("omega,fraction\n")
            for omega, frac in fractions.items():
                fh.write(f"{omega!r},{frac!r}\n")
    elif name == "example4":
        steps_list = [int(s * scale) for s in (1000, 2000, 4000)]
        cfg = dataclasses.replace(example4_config(), reference="self", ref_refine=2)
        rows = convergence_sweep(cfg, steps_list)
        sweep_to_csv(rows, os.path.join(outdir, "example4_dt_sweep.csv"))
        results["orders"] = observed_orders(rows)
        results["steps_per_second"] = rows[-1].steps_per_second
    else:
        raise ConfigError(f"unknown example {name!r}; choices: {EXAMPLE_NAMES}")
    with open(os.path.join(outdir, f"{name}_summary.json"), "w") as fh:
        json.dump(results, fh, indent=2, default=str)
    return results


# --- transform self-test (CLI surface) ---

def transform_selftest(trials: int = 20, seed: int = 1234) -> list:
    """Oracle-equivalence check of every fast transform path; returns rows of
    (name, max relative error, pass)."""
    from . import xform

    rng = np.random.default_rng(seed)
    cfg = ContourConfig(eps=1e-10, M=64, NE=48, p=8, q=10, nr=2)
    quad = build_quadrature(cfg)
    rows = []
    for mode in ("direct", "cheb"):
        plan = xform.TransformPlan1D.build(quad, c_mode=mode)
        worst_f = worst_i = 0.0
        for _ in range(trials):
            f = rng.standard_normal(cfg.M) + 1j * rng.standard_normal(cfg.M)
            got = xform.forward_1d(plan, f).values
            ref = xform.dense_forward_1d(quad, f)
            worst_f = max(worst_f, np.max(np.abs(got - ref)) / np.sum(np.abs(f)))
            c = rng.standard_normal(quad.N) + 1j * rng.standard_normal(quad.N)
            got = xform.inverse_1d(plan, c)
            ref = xform.dense_inverse_1d(quad, c)
            worst_i = max(worst_i, np.max(np.abs(got - ref)) / np.sum(np.abs(c)))
        rows.append((f"forward_1d[{mode}]", worst_f, worst_f < 1e-12))
        rows.append((f"inverse_1d[{mode}]", worst_i, worst_i < 1e-12))
    quad = build_quadrature(dataclasses.replace(cfg, d=2))
    plan2 = xform.TransformPlan2D.build(quad, quad)
    worst_f = worst_i = 0.0
    for _ in range(max(3, trials // 4)):
        F = rng.standard_normal((cfg.M, cfg.M)) + 1j * rng.standard_normal((cfg.M, cfg.M))
        got = xform.forward_2d(plan2, F).values
        ref = xform.dense_forward_2d(quad, quad, F)
        worst_f = max(worst_f, np.max(np.abs(got - ref)) / np.sum(np.abs(F)))
        C = rng.standard_normal((quad.N, quad.N)) + 1j * rng.standard_normal((quad.N, quad.N))
        got = xform.inverse_2d(plan2, C)
        ref = xform.dense_inverse_2d(quad, quad, C)
        worst_i = max(worst_i, np.max(np.abs(got - ref)) / np.sum(np.abs(C)))
    rows.append(("forward_2d", worst_f, worst_f < 1e-11))
    rows.append(("inverse_2d", worst_i, worst_i < 1e-11))
    return rows
