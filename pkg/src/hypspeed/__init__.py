"""Hyperbolic speeds, harmonic measures and walk-on-spheres estimates for semigroups in the disc."""
from .domains import (Parabola, Sector, Strip, VerticalHalfPlane, Xi, inclusion_check,
                      parse_model)
from .harmonic import (HMEstimate, SLIT, SlitPolyline, Theta, build_slit, c_theta,
                       gamma_star_lower, omega_theta_exact, strong_markov_check, wos_measure)
from .hypgeo import LogPolarPoint, arc_At, cayley, dist_disc, dist_halfplane, inv_cayley
from .models import Orbit, ingest_orbit, orbit_grid, orbit_point, read_orbit_csv, write_orbit_csv
from .speeds import (AsymptoteFit, SpeedBound, SpeedTriple, euclid_rates, fit_asymptote,
                     speed_bounds_quadrature, speed_triple)
from .verify import (VerificationReport, good_sequence, monotonicity_experiment, question_scan,
                     rate_check, xi_tangential_check)

__version__ = "0.1.0"
