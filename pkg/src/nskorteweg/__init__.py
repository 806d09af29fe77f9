"""Pseudo-spectral Navier-Stokes-Korteweg simulator with exact linear propagator."""
from .errors import (CaseError, DomainError, FitError, FormatError, NodeError, NonFiniteError,
                     NSKError, ParamError, QuadratureError, RegimeError, ShapeError, VacuumError)
from .model import (Case, ModelParams, Phase, PhaseReport, Polynomial, PowerLaw, VanDerWaals,
                    classify_phase, eval_pressure, helmholtz_W, pressure_nonlinearity_G, validate)
from .spectrum import (EigenPair, asymptotics, band_abscissa_c0, crossover_B, eigenvalues)
from .green import (GreenMatrix, divided_diff_exp, green_matrix, green_matrix_contour, propagate)
from .field import (Band, BandSpec, BesselPotential, Divergence, Gradient, Grid, Laplacian,
                    SpectralState, apply_symbol, dealias, transform)
from .analysis import (Besov, DecayFit, GaussianDatum, Lebesgue, Sobolev, fit_decay,
                       lowfreq_eval, norm)
from .dynamics import (PicardResult, Scheme, SolverConfig, Trajectory, nonlinearity_F,
                       picard_solve, solve, step)

__version__ = "0.1.0"
