"""Thomas-Fermi-limit energy expansions of Gross-Pitaevskii ground states.

The toolkit builds the Painleve-II boundary-layer profile (Hastings-McLeod
branch), its linear correction functions, and every regularized integral
entering the small-epsilon expansions of the total, potential and kinetic
ground-state energies in dimensions 1, 2 and 3 - and validates the expansions
against an independent direct radial solver.
"""

__version__ = "0.1.0"

from .constants import (ExpansionCoefficients, IntegralValue,
                        RegularizedIntegrand, beta_integral, dps_constant,
                        energy_expansion_coeffs, integral_table,
                        kinetic_expansion_coeffs, physical_kinetic_energy,
                        physical_kinetic_energy_direct,
                        potential_expansion_coeffs, read_constants_report,
                        regularized_integral, regularized_integrand,
                        virial_identity_check)
from .corrections import (CorrectionFunction, correction_tail_fit,
                          forcing_term, solve_correction)
from .grid import Grid, ScalarField
from .ground_state import (GroundState, VerificationReport, energies,
                           extract_remainder, radial_grid, solve_ground_state,
                           verify_expansion)
from .painleve import (HastingsMcLeod, load_profile, save_profile,
                       solve_hastings_mcleod)
from .tails import (TailSeries, b_coefficients, b_integers,
                    correction_tail_coefficients, correction_tail_series,
                    nu0_tail_minus, nu0_tail_plus, nu0_tail_series)
from .weighted_integrals import (TestIntegrand, lemma_prediction, order_table,
                                 power_tail_integrand,
                                 truncated_weighted_integral)
