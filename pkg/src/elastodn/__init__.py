"""Boundary identification of isotropic elastic media from DN data.

Recovers the Lame moduli and density (with depth derivatives) at the
boundary from the dynamical Dirichlet-to-Neumann map, via the finite-time
Laplace transform, factorization of the transformed operator into depth
propagators, Riccati layer stripping, and incoming/outgoing wave splitting.
"""

from .medium import (BoundaryChart, CotangentPoint, MediumJet,
                     StratifiedProfile, acoustic_tensor, elasticity_tensor)
from .symbols import (ClosedFormFactors, Factorization, SymbolTriple,
                      assemble_triple, closed_form_factors,
                      closed_form_factorization, factorization_residual,
                      pencil_value, spectral_factorization)
from .dn import (FirstOrderTerms, RiccatiState, dn_depth_derivative,
                 first_order_terms, initial_riccati_state, layer_strip,
                 principal_dn_symbol, riccati_coefficients, riccati_rhs,
                 s0_depth_derivative, solve_symbol_sylvester,
                 subprincipal_apply, subprincipal_dn_symbol, subprincipal_map)
from .reconstruct import (ProbeSet, overdetermined_mu_rho,
                          probes_by_finite_differences, probes_from_profile,
                          probes_from_symbols, recover_first_derivatives,
                          recover_higher_derivatives, recover_jet,
                          recover_lambda, recover_mu_rho)
from .bridge import (DNSymbol, EllipticSolution, LaplaceProbe, TimeTrace,
                     bridge_check, discrete_energy, dn_matrix,
                     elliptic_dn_solve, end_to_end_reconstruction,
                     extract_dn_symbol, finite_laplace_transform,
                     stability_limit, time_domain_solve, window_multiplier)
from .splitting import (SplitState, companion_block, decay_check,
                        split_boundary_field, splitting_matrices)

__version__ = "0.1.0"
