"""Spectral integral-equation solvers for the time-dependent Schrodinger
equation with smooth potentials and a uniform vector potential.

Two solver families share one marching structure: a periodic pseudo-spectral
solver on [-pi, pi]^d driven by the standard FFT, and a free-space solver on
[-1, 1]^d whose spectral coefficients live on a deformed complex-frequency
contour, with FFT-accelerated transforms between grid and contour.
"""

from .contour import (AlpertRule, ContourConfig, GammaQuadrature, alpert_rule,
                      build_quadrature, gauss_legendre, quiver_radius, select_H)
from .errors import ConfigError, NumericsError, TdseError
from .freespace import FreeSolver, FreeState
from .harness import (ErrorReport, ExperimentConfig, convergence_sweep,
                      l2_error, read_snapshot, run_example, run_free,
                      run_periodic, write_snapshot)
from .periodic import AdamsScheme, PeriodicSolver, PeriodicState
from .problems import (CallbackField, FieldSpec, GaussianWell,
                       GroundStateResult, MovingPeriodicGaussianWell,
                       WavepacketParams, ground_state, ground_state_radial,
                       ionization_fraction, wavepacket, wavepacket_advected)
from .xform import (SpectralCoeffs1D, SpectralCoeffs2D, SSFFTPlan,
                    TransformPlan1D, TransformPlan2D, forward_1d, forward_2d,
                    inverse_1d, inverse_2d, ssfft_forward, ssfft_inverse)

__version__ = "0.1.0"

__all__ = [
    "AdamsScheme", "AlpertRule", "CallbackField", "ConfigError",
    "ContourConfig", "ErrorReport", "ExperimentConfig", "FieldSpec",
    "FreeSolver", "FreeState", "GammaQuadrature", "GaussianWell",
    "GroundStateResult", "MovingPeriodicGaussianWell", "NumericsError",
    "PeriodicSolver", "PeriodicState", "SSFFTPlan", "SpectralCoeffs1D",
    "SpectralCoeffs2D", "TdseError", "TransformPlan1D", "TransformPlan2D",
    "WavepacketParams", "alpert_rule", "build_quadrature", "convergence_sweep",
    "forward_1d", "forward_2d", "gauss_legendre", "ground_state",
    "ground_state_radial", "inverse_1d", "inverse_2d", "ionization_fraction",
    "l2_error", "quiver_radius", "read_snapshot", "run_example", "run_free",
    "run_periodic", "select_H", "ssfft_forward", "ssfft_inverse",
    "wavepacket", "wavepacket_advected", "write_snapshot",
]
