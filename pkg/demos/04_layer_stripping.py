"""Propagate the modified DN map into the medium (invariant embedding).

The modified DN map i nn^{-1} Lambda satisfies a matrix Riccati equation
in depth.  Starting from the boundary symbol, a forward Euler sweep
pushes the data deeper layer by layer; at each depth the propagated map
can be compared against the directly computed symbol of the local
medium.  The sweep is exponentially unstable at rate about
2 Im(eig plus) / h, which is the ill-posedness of the inverse problem
showing up, not a solver artifact; the demo also shows this growth by
perturbing the initial data.

Run:  python demos/04_layer_stripping.py
"""

import numpy as np

from elastodn import (BoundaryChart, CotangentPoint, assemble_triple,
                      closed_form_factors, closed_form_factorization,
                      initial_riccati_state, layer_strip, principal_dn_symbol)
from elastodn.medium import StratifiedProfile

profile = StratifiedProfile.from_polynomials([2.0, 0.2], [1.0, 0.3], [1.0, -0.1],
                                             span=(0.0, 0.5))
tau, ds = 4.0, 0.002
chart = BoundaryChart.flat()
eta = (1.0, 0.0)


def direct_lam_hat(s):
    jet = profile.jet(s)
    triple = assemble_triple(jet, chart, CotangentPoint(eta_prime=eta, s=s))
    fact = closed_form_factorization(closed_form_factors(jet, eta), triple.nn, chart)
    return 1j * np.linalg.inv(triple.nn) @ principal_dn_symbol(fact, triple)


state = initial_riccati_state(profile, [eta], tau)
print(f"h = {state.h}, step {ds}; Euler sweep with checkpoints:")
for leg in range(5):
    state = layer_strip(state, profile, ds, 25)
    gap = np.linalg.norm(state.lam_hat[0] - direct_lam_hat(state.s))
    print(f"  depth {state.s:.3f}: |propagated - direct| = {gap:.3e}")

print(f"flags raised: {len(state.flags)}")

print("\ninstability of the deepening sweep (perturbed initial data):")
reference = layer_strip(initial_riccati_state(profile, [eta], tau),
                        profile, ds, 125)
for eps in (1e-8, 1e-6, 1e-4):
    state = initial_riccati_state(profile, [eta], tau)
    state.lam_hat[0] += eps * np.eye(3)
    out = layer_strip(state, profile, ds, 125)
    growth = np.linalg.norm(out.lam_hat[0] - reference.lam_hat[0]) / (eps * np.sqrt(3))
    print(f"  perturbation {eps:.0e} amplified {growth:.1f}x over 0.25 depth")
jet0 = profile.jet(0.0)
triple0 = assemble_triple(jet0, chart, CotangentPoint(eta_prime=eta))
fact0 = closed_form_factorization(closed_form_factors(jet0, eta), triple0.nn, chart)
rate = 2 * np.min(fact0.eig_plus.imag) / state.h
print(f"  linearized growth rate 2 min Im(eig plus)/h = {rate:.2f} per unit depth"
      f" (e^{{rate * 0.25}} = {np.exp(rate * 0.25):.1e} over the sweep)")
