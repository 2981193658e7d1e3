"""DN-map symbol hierarchy and Riccati depth propagation.

The principal DN symbol at depth s is -i (nn plus + mn^T).  Its first
subprincipal correction is obtained from a Sylvester-type recursion whose
coefficient spectra sit in opposite half planes, which also defines the
bijective map taking the depth derivative of the principal symbol to the
subprincipal one.  The modified DN map i nn^{-1} Lambda satisfies a matrix
Riccati equation in depth, propagated here with forward Euler (layer
stripping).  The deepening sweep is linearly unstable with rate about
2 Im(eig plus)/h, which is inherent ill-posedness rather than a solver
defect; the propagator only reports diagnostics.

Scope: subprincipal terms are exact for stratified media in a flat chart,
where all lateral symbol derivatives vanish and the order-h coefficients
collect exactly one depth derivative of the medium.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_sylvester as _scipy_sylvester

from .medium import BoundaryChart, CotangentPoint
from .symbols import (assemble_triple, closed_form_factors,
                      closed_form_factorization)

_SPECTRA_GAP = 1e-10


@dataclass(frozen=True)
class FirstOrderTerms:
    """Order-h symbol data for a stratified medium at one depth.

    drift0, drift1 : the order-h pencil coefficients that collect one depth
        derivative of the medium (-i d/ds of the nn block and of mn^T).
    correction : first-order correction to the upward depth factor, solving
        the order-h recursion equation.
    """

    drift0: np.ndarray
    drift1: np.ndarray
    correction: np.ndarray


@dataclass
class RiccatiState:
    """Modified DN map i nn^{-1} Lambda on an eta'-grid at depth s.

    ``lam_hat`` has shape (n_points, 3, 3).  ``j1``, ``k1``, ``f2`` hold the
    most recently assembled Riccati coefficients for each grid point.
    ``flags`` collects (step, point, message) diagnostics; losing the
    Hermitian-positivity certificate is flagged, not fatal.
    """

    s: float
    h: float
    xi_grid: np.ndarray
    lam_hat: np.ndarray
    tau_hat: complex = 1.0
    j1: np.ndarray | None = None
    k1: np.ndarray | None = None
    f2: np.ndarray | None = None
    flags: list = field(default_factory=list)
    active: np.ndarray | None = None


def principal_dn_symbol(fact, triple):
    """Principal symbol of the DN map: -i (nn plus + mn^T)."""
    return -1j * (triple.nn @ fact.plus + triple.mn.T)


def solve_symbol_sylvester(s_plus, nn, mn, weight, rhs, gap_tol=_SPECTRA_GAP):
    """Solve the spectrally separated recursion equation.

    Returns X with  s_plus X + X s_plus + nn^{-1}(mn + mn^T) X = rhs,
    solved in the rearranged form  -nn^{-1} weight s_plus^{-1} X + X s_plus
    = rhs, whose coefficient spectra both lie strictly in the upper half
    plane (weight = mm + rho tau_hat^2 metric).  The rearrangement uses the
    quadratic equation satisfied by s_plus, so inconsistent blocks are
    rejected; raises as well when the verified spectra come within
    `gap_tol` of overlapping.
    """
    nn_inv = np.linalg.inv(nn)
    quad = nn @ s_plus @ s_plus + (mn + mn.T) @ s_plus + weight
    if np.linalg.norm(quad) > 1e-8 * max(1.0, np.linalg.norm(weight)):
        raise RuntimeError("factor does not satisfy the pencil quadratic "
                           "for the supplied blocks")
    a = -nn_inv @ weight @ np.linalg.inv(s_plus)
    eig_a = np.linalg.eigvals(a)
    eig_b = np.linalg.eigvals(s_plus)
    if np.min(eig_a.imag) < gap_tol or np.min(eig_b.imag) < gap_tol:
        raise RuntimeError(
            "coefficient spectra are not separated from the real axis: "
            f"{eig_a}, {eig_b}"
        )
    return _scipy_sylvester(a, s_plus, rhs)


def subprincipal_apply(triple, fact, x):
    """Forward map  (weight) plus^{-1} nn^{-1} x - x plus."""
    op = triple.weight @ np.linalg.inv(fact.plus) @ np.linalg.inv(triple.nn)
    return op @ x - x @ fact.plus


def subprincipal_map(triple, fact, y, gap_tol=_SPECTRA_GAP):
    """Bijective map W: solve  (weight) plus^{-1} nn^{-1} X - X plus = y.

    Depends only on the medium at the evaluation depth, not on its normal
    derivatives.  X = W(D_s lambda0) is the subprincipal DN symbol up to
    terms carrying no depth derivative (exactly, in a stratified flat
    chart).  Unique by the opposite-half-plane spectra of the coefficients.
    """
    a = triple.weight @ np.linalg.inv(fact.plus) @ np.linalg.inv(triple.nn)
    eig_a = np.linalg.eigvals(a)
    eig_b = np.linalg.eigvals(fact.plus)
    if np.max(eig_a.imag) > -gap_tol or np.min(eig_b.imag) < gap_tol:
        raise RuntimeError(
            f"subprincipal map spectra not separated: {eig_a}, {eig_b}"
        )
    return _scipy_sylvester(a, -fact.plus, y)


def _triple_derivative(jet, point, tau_hat):
    """d/ds of the pencil blocks for a stratified flat chart from jet derivatives."""
    if jet.order < 1:
        raise ValueError("profile jet lacks first derivatives")
    dl, dm, dr = jet.d_lam[0], jet.d_mu[0], jet.d_rho[0]
    eta = np.asarray(point.eta_prime, dtype=float)
    d_nn = np.diag([dm, dm, dl + 2 * dm]).astype(complex)
    d_mn = np.zeros((3, 3), complex)
    d_mn[:2, 2] = dl * eta        # lam eta_i on the (i,3) entries, i tangential
    d_mn[2, :2] = dm * eta        # mu eta_k on the (3,k) entries
    xsq = float(eta @ eta)
    d_mm = (dl + dm) * np.outer(np.append(eta, 0.0), np.append(eta, 0.0)) \
        + dm * xsq * np.eye(3)
    d_weight = d_mm + dr * complex(tau_hat)**2 * np.eye(3)
    return d_nn, d_mn, d_mm, d_weight


def s0_depth_derivative(triple, fact, d_nn, d_mn, d_weight):
    """d/ds of the upward factor by differentiating its quadratic equation.

    Differentiating  nn plus^2 + (mn+mn^T) plus + weight = 0  in depth gives
    a recursion equation for plus' with the same separated coefficients.
    """
    s0 = fact.plus
    nn_inv = np.linalg.inv(triple.nn)
    rhs = -nn_inv @ (d_nn @ s0 @ s0 + (d_mn + d_mn.T) @ s0 + d_weight)
    return solve_symbol_sylvester(s0, triple.nn, triple.mn, triple.weight, rhs)


def first_order_terms(profile, point, tau_hat=1.0, chart=None):
    """Order-h symbol terms at point.s for a stratified flat-chart medium.

    Expanding the operator in divergence form, the order-h terms collect
    exactly one depth derivative of the coefficients: drift0 = -i d(nn)/ds
    multiplying the normal frequency and drift1 = -i d(mn^T)/ds.  The factor
    correction then solves the order-h recursion equation; its residual is
    checked by the caller's tests rather than here.
    """
    chart = chart or BoundaryChart.flat()
    if not chart.is_flat:
        raise ValueError("subprincipal terms are implemented for flat charts only")
    jet = profile.jet(point.s, k_max=1)
    triple = assemble_triple(jet, chart, point, tau_hat)
    fact = closed_form_factorization(
        closed_form_factors(jet, point.eta_prime, tau_hat), triple.nn, chart)
    d_nn, d_mn, d_mm, d_weight = _triple_derivative(jet, point, triple.tau_hat)

    drift0 = -1j * d_nn
    drift1 = -1j * d_mn.T
    ds0 = s0_depth_derivative(triple, fact, d_nn, d_mn, d_weight)
    nn_inv = np.linalg.inv(triple.nn)
    rhs = -(nn_inv @ drift0 @ fact.plus + nn_inv @ drift1 + (-1j) * ds0)
    correction = solve_symbol_sylvester(fact.plus, triple.nn, triple.mn,
                                        triple.weight, rhs)
    return FirstOrderTerms(drift0=drift0, drift1=drift1, correction=correction)


def subprincipal_dn_symbol(triple, terms):
    """Subprincipal DN symbol -i nn correction (order-h coefficient)."""
    return -1j * triple.nn @ terms.correction


def dn_depth_derivative(triple, fact, d_nn, d_mn, d_weight):
    """d/ds of the principal DN symbol from jet first derivatives."""
    ds0 = s0_depth_derivative(triple, fact, d_nn, d_mn, d_weight)
    return -1j * (d_nn @ fact.plus + triple.nn @ ds0 + d_mn.T)


def riccati_coefficients(triple, terms, h):
    """Coefficients (j1, k1, f2) of the depth Riccati equation.

    j1 = nn^{-1}(mn + h drift0), k1 = -nn^{-1} mn^T, and f2 collects the
    zeroth- and first-order source terms, including -h D_s(nn^{-1} mn^T)
    assembled from the drift matrices.
    """
    nn_inv = np.linalg.inv(triple.nn)
    mnt = triple.mn.T
    k_part = nn_inv @ mnt
    j1 = nn_inv @ (triple.mn + h * terms.drift0)
    k1 = -k_part
    # D_s(nn^{-1} mn^T) = -nn^{-1} drift0 nn^{-1} mn^T + nn^{-1} drift1
    ds_k = -nn_inv @ terms.drift0 @ k_part + nn_inv @ terms.drift1
    f2 = (-h * ds_k
          - nn_inv @ (triple.mn + mnt + h * terms.drift0) @ k_part
          + nn_inv @ (h * terms.drift1 + triple.weight)
          + k_part @ k_part)
    return j1, k1, f2


def riccati_rhs(lam_hat, triple, terms, h):
    """Pointwise right-hand side D_s lam_hat = -(j1 X + X k1 + X^2 + f2)/h."""
    j1, k1, f2 = riccati_coefficients(triple, terms, h)
    return -(j1 @ lam_hat + lam_hat @ k1 + lam_hat @ lam_hat + f2) / h


def _zero_terms():
    z = np.zeros((3, 3), complex)
    return FirstOrderTerms(drift0=z, drift1=z, correction=z)


def initial_riccati_state(profile, xi_grid, tau, s=0.0, first_order=True):
    """Equilibrium initial data i nn^{-1} Lambda at depth s.

    Uses the principal DN symbol, plus the subprincipal correction when
    `first_order` (recommended: the deepening sweep amplifies any initial
    offset, so the order-h term matters even for short spans).
    """
    tau = complex(tau)
    h = 1.0 / abs(tau)
    tau_hat = tau / abs(tau)
    xi_grid = np.atleast_2d(np.asarray(xi_grid, dtype=float))
    chart = BoundaryChart.flat()
    lam_hat = np.empty((len(xi_grid), 3, 3), complex)
    for i, eta in enumerate(xi_grid):
        point = CotangentPoint(eta_prime=tuple(eta), s=s)
        jet = profile.jet(s, k_max=min(1, profile.order))
        triple = assemble_triple(jet, chart, point, tau_hat)
        fact = closed_form_factorization(
            closed_form_factors(jet, eta, tau_hat), triple.nn, chart)
        lam = principal_dn_symbol(fact, triple)
        if first_order and (profile.max_derivative_order is None or profile.order >= 1):
            terms = first_order_terms(profile, point, tau_hat)
            lam = lam + h * subprincipal_dn_symbol(triple, terms)
        lam_hat[i] = 1j * np.linalg.inv(triple.nn) @ lam
    return RiccatiState(s=s, h=h, xi_grid=xi_grid, lam_hat=lam_hat,
                        tau_hat=tau_hat, active=np.ones(len(xi_grid), bool))


def layer_strip(initial, profile, ds, n_steps, eta_max=None, herm_tol=0.3):
    """Forward-Euler propagation of the modified DN map in depth.

    Advances lam_hat from initial.s over n_steps steps of size ds, updating
    the Riccati coefficients from the profile at every step.  Grid points
    with |eta'| > eta_max are frozen (high-frequency cutoff; the flow is
    exponentially unstable at rate about 2 Im(eig plus)/h).  For real tau
    a Hermitian-positivity certificate of -i nn lam_hat is tracked; losing
    it is recorded in state.flags, not fatal.

    Returns a new RiccatiState at depth initial.s + n_steps*ds.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    s_end = initial.s + n_steps * ds
    if not (profile.s_min - 1e-12 <= s_end <= profile.s_max + 1e-12):
        raise ValueError("propagation leaves the profile depth range")
    state = RiccatiState(s=initial.s, h=initial.h, xi_grid=initial.xi_grid.copy(),
                         lam_hat=initial.lam_hat.copy(), tau_hat=initial.tau_hat,
                         flags=list(initial.flags),
                         active=(initial.active.copy() if initial.active is not None
                                 else np.ones(len(initial.xi_grid), bool)))
    if eta_max is not None:
        for i, eta in enumerate(state.xi_grid):
            if np.linalg.norm(eta) > eta_max and state.active[i]:
                state.active[i] = False
                state.flags.append((0, i, f"frozen: |eta'|>{eta_max}"))

    chart = BoundaryChart.flat()
    real_tau = abs(state.tau_hat.imag) < 1e-14
    n_pts = len(state.xi_grid)
    j1s = np.empty((n_pts, 3, 3), complex)
    k1s = np.empty((n_pts, 3, 3), complex)
    f2s = np.empty((n_pts, 3, 3), complex)

    for step in range(n_steps):
        s = state.s
        has_deriv = profile.max_derivative_order is None or profile.max_derivative_order >= 1
        jet = profile.jet(s, k_max=1 if has_deriv else 0)
        for i in range(n_pts):
            if not state.active[i]:
                continue
            point = CotangentPoint(eta_prime=tuple(state.xi_grid[i]), s=s)
            triple = assemble_triple(jet, chart, point, state.tau_hat)
            if jet.order >= 1:
                d_nn, d_mn, _, _ = _triple_derivative(jet, point, state.tau_hat)
                terms = FirstOrderTerms(drift0=-1j * d_nn, drift1=-1j * d_mn.T,
                                        correction=np.zeros((3, 3), complex))
            else:
                terms = _zero_terms()
            j1s[i], k1s[i], f2s[i] = riccati_coefficients(triple, terms, state.h)
            d_s = -(j1s[i] @ state.lam_hat[i] + state.lam_hat[i] @ k1s[i]
                    + state.lam_hat[i] @ state.lam_hat[i] + f2s[i]) / state.h
            state.lam_hat[i] = state.lam_hat[i] + ds * (1j * d_s)
            if real_tau:
                lam = -1j * triple.nn @ state.lam_hat[i]
                herm = 0.5 * (lam + lam.conj().T)
                skew = np.linalg.norm(lam - lam.conj().T) / max(np.linalg.norm(lam), 1e-30)
                if skew > herm_tol or np.min(np.linalg.eigvalsh(herm)) <= 0:
                    state.flags.append((step, i, f"hermitian-positivity lost (skew {skew:.2e})"))
        state.s = s + ds
    state.j1, state.k1, state.f2 = j1s, k1s, f2s
    return state
