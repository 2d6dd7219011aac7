"""G-function spectra of the two-mode and two-photon quantum Rabi models.

Regular levels are zeros of G±(x); exceptional (parity-doublet) levels come
from the pole-lifting condition f_n(n) = 0; a sector-wise exact
diagonalization serves as the independent oracle.
"""
__version__ = "0.1.0"

from .errors import (CouplingOutOfRange, DeltaZero, GridResolutionExceeded,
                     InvalidSector, LiftingFailed, NoConvergence, NoSolution,
                     PoleProximity, RabiError)
from .model import (BogoliubovData, Controls, Family, ModelParams, Sector,
                    bogoliubov, energy_from_x, x_from_energy)
from .recurrence import CoefficientSequence, e_from_f, f_sequence, scaled_terms
from .gfunction import GEvaluation, eval_G, pole_positions
from .solver import (SpectralPoint, SweepTable, collapse_spacing,
                     find_zeros_in_interval, lowest_levels, regular_spectrum, sweep_g)
from .exceptional import (ExceptionalPoint, closed_form_n1, f_n_at_pole,
                          solve_exceptional_delta, solve_exceptional_g, verify_lifting)
from .ed import (TridiagonalMatrix, build_sector_matrix, build_twophoton_matrix,
                 ed_spectrum, eigenvalues_tridiagonal)
