"""Incoming/outgoing decomposition of boundary fields.

The first-order depth system for (v, h D_s v) is block-diagonalized by the
pair of right solvents of the quadratic pencil: `plus` (spectrum in the
upper half plane) and `minus_right` (lower half plane).  The splitting
matrices are

    P     = [[ d m, -d], [-d p,  d]],   d = (m - p)^{-1},
    P_inv = [[ I, I], [ p, m ]],        p = plus, m = minus_right,

so that P conjugates the companion block matrix to diag(plus, minus_right)
and the constituents v_plus, v_minus satisfy decoupled first-order depth
equations at principal order.  Orientation: v_plus is governed by `plus`
and decays with increasing depth for Re tau > 0; by that decay criterion it
is the incoming constituent and v_minus the outgoing one.

On the boundary, h D_s v = i nn^{-1} Lambda v - nn^{-1} mn^T v converts
measured DN data into the second block component, so the split needs only
boundary data and the factorization.  (The sign of the mn^T term is fixed
by requiring the decaying half-space solution to split as (v, 0); see the
traction convention in the bridge module.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .medium import BoundaryChart
from .symbols import closed_form_factors, closed_form_factorization
from .bridge import elliptic_dn_solve


@dataclass(frozen=True)
class SplitState:
    """Splitting matrices and, once applied, the two field constituents."""

    p: np.ndarray
    p_inv: np.ndarray
    v_plus: np.ndarray | None = None
    v_minus: np.ndarray | None = None


def splitting_matrices(fact, cond_limit=1e12):
    """Build P and P^{-1} from a factorization.

    Validates P P^{-1} = I, and the alternate block expression
    P = (m-p)^{-1} diag(1,-1) [[I, m],[I, p]] [[0,-1],[1, 0]]; both are
    block algebra on any solvent pair, so failure means a numerical fault.
    Raises when inverting m - p is ill conditioned beyond `cond_limit`
    relative to the factor scale.
    """
    p = fact.plus
    m = fact.minus_right
    gap = m - p
    scale = max(np.linalg.norm(p), np.linalg.norm(m))
    if np.linalg.norm(np.linalg.pinv(gap)) * scale > cond_limit:
        raise RuntimeError("solvent gap minus_right - plus is numerically singular")
    d = np.linalg.inv(gap)
    eye = np.eye(3)
    pm = np.block([[d @ m, -d], [-d @ p, d]])
    pm_inv = np.block([[eye, eye], [p, m]])
    if np.linalg.norm(pm @ pm_inv - np.eye(6)) > 1e-11 * max(1.0, np.linalg.norm(pm)):
        raise RuntimeError("splitting inverse identity failed")
    dblk = np.block([[d, 0 * eye], [0 * eye, d]])
    sign = np.block([[eye, 0 * eye], [0 * eye, -eye]])
    star = np.block([[eye, m], [eye, p]])
    rot = np.block([[0 * eye, -eye], [eye, 0 * eye]])
    alt = dblk @ sign @ star @ rot
    if np.linalg.norm(alt - pm) > 1e-10 * max(1.0, np.linalg.norm(pm)):
        raise RuntimeError("alternate splitting expression failed")
    return SplitState(p=pm, p_inv=pm_inv)


def companion_block(triple):
    """First-order system matrix [[0, I], [-nn^{-1} weight, -nn^{-1}(mn+mn^T)]]."""
    nn_inv = np.linalg.inv(triple.nn)
    eye = np.eye(3)
    return np.block([[0 * eye, eye],
                     [-nn_inv @ triple.weight, -nn_inv @ (triple.mn + triple.mn.T)]])


def split_boundary_field(state, v, dn_value, triple, h):
    """Split boundary displacement into incoming/outgoing constituents.

    `dn_value` is the transformed DN map applied to v.  The normal
    derivative is reconstructed as h D_s v = i nn^{-1} dn_value
    - nn^{-1} mn^T v (the combination under which the traction convention
    of the bridge module gives exactly h D_s v = plus v on the decaying
    half-space solution), and the 6-vector (v, h D_s v) is multiplied by P.
    Returns (v_plus, v_minus); v = v_plus + v_minus by the first block row
    of P_inv.
    """
    v = np.asarray(v, dtype=complex)
    dn_value = np.asarray(dn_value, dtype=complex)
    nn_inv = np.linalg.inv(triple.nn)
    slope = 1j * nn_inv @ dn_value - nn_inv @ (triple.mn.T @ v)
    stacked = state.p @ np.concatenate([v, slope])
    return stacked[:3], stacked[3:]


def decay_check(profile, eta_prime, probe, n_depths=48, psi=None,
                fit_window=(0.1, 0.85)):
    """Fit the depth-decay rate of the incoming constituent of a field.

    Solves the transformed problem, splits the field at sampled depths with
    the local factorization, and fits log ||v_plus|| against depth by least
    squares over the interior `fit_window` fraction of the samples.  The
    expected rate is min Im eig(plus)/h; `psi` defaults to the eigenvector
    of the slowest mode so a single exponential is fitted.

    Returns a report dict with the fitted and expected rates, their relative
    gap, and the per-depth constituent norms.
    """
    chart = BoundaryChart.flat()
    jet0 = profile.jet(profile.s_min)
    fact0 = closed_form_factorization(
        closed_form_factors(jet0, eta_prime, probe.tau_hat),
        _nn(jet0), chart)
    eigvals, eigvecs = np.linalg.eig(fact0.plus)
    slow = int(np.argmin(eigvals.imag))
    if psi is None:
        psi = eigvecs[:, slow]
    expected = float(eigvals.imag.min()) / probe.h

    sol = elliptic_dn_solve(profile, eta_prime, probe, psi)
    idx = np.unique(np.linspace(0, len(sol.depth_grid) - 1, n_depths).astype(int))
    depths, plus_norm, minus_norm = [], [], []
    for k in idx:
        s = sol.depth_grid[k]
        jet = profile.jet(s)
        fact = closed_form_factorization(
            closed_form_factors(jet, eta_prime, probe.tau_hat), _nn(jet), chart)
        state = splitting_matrices(fact)
        slope = -1j * probe.h * sol.dv_ds[k]        # h D_s v on the solution
        stacked = state.p @ np.concatenate([sol.v[k], slope])
        depths.append(s)
        plus_norm.append(np.linalg.norm(stacked[:3]))
        minus_norm.append(np.linalg.norm(stacked[3:]))
    depths = np.array(depths)
    plus_norm = np.array(plus_norm)
    minus_norm = np.array(minus_norm)

    if plus_norm.max() == 0:
        return {"fitted_rate": 0.0, "expected_rate": expected, "rel_gap": 0.0,
                "depths": depths, "plus_norm": plus_norm, "minus_norm": minus_norm,
                "trivial": True}
    lo = int(fit_window[0] * len(depths))
    hi = max(int(fit_window[1] * len(depths)), lo + 2)
    keep = slice(lo, hi)
    good = plus_norm[keep] > 1e-13 * plus_norm.max()
    slope_fit = np.polyfit(depths[keep][good], np.log(plus_norm[keep][good]), 1)[0]
    fitted = -float(slope_fit)
    return {"fitted_rate": fitted, "expected_rate": expected,
            "rel_gap": abs(fitted - expected) / expected,
            "depths": depths, "plus_norm": plus_norm, "minus_norm": minus_norm,
            "trivial": False}


def _nn(jet):
    return np.diag([jet.mu, jet.mu, jet.lam + 2 * jet.mu]).astype(float)
