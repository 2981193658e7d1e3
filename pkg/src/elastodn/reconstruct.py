"""Boundary recovery of (lam, mu, rho) and their depth derivatives.

The recovery works entry-wise on the principal DN symbol in the rotated
frame (tangential frequency along the first axis).  With probe frequencies
|xi'| = 1/c0 and sqrt(2)/c0 for a scaling constant c0 > 0:

  * the (2,2) entry is sqrt(mu^2 |xi'|^2 + rho mu), so the difference of its
    squares at the two frequencies isolates mu, then rho follows;
  * the squared (1,1)/(3,3) ratio r satisfies
    |xi'|^2 + rho/(lam+2mu) = r (mu |xi'|^2 + rho)/mu, which determines lam.
    The c0-explicit forms are used throughout; the commonly printed formulas
    are their c0 = 1 specialization.

Depth derivatives of the same four probe entries determine the parameter
derivatives order by order through a triangular system: Leibniz
differentiation of the three identities keeps the leading coefficients of
the first-order system at every order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import _series as ts
from .medium import MediumJet

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class ProbeSet:
    """Probed DN symbol entries and their depth derivatives.

    Each field is an array indexed by derivative order: entry k is the k-th
    depth derivative of the probed quantity (entry 0 the value itself).
    e22 and e22_scaled are the (2,2) entries at |xi'| = 1/c0 and sqrt(2)/c0;
    e11 and e33 the (1,1) and (3,3) entries at |xi'| = 1/c0.
    """

    e22: np.ndarray
    e22_scaled: np.ndarray
    e11: np.ndarray
    e33: np.ndarray
    c0: float = 1.0

    def __post_init__(self):
        for name in ("e22", "e22_scaled", "e11", "e33"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        n = len(self.e22)
        if any(len(getattr(self, f)) != n for f in ("e22_scaled", "e11", "e33")):
            raise ValueError("probe entry arrays must share one length")
        if not self.c0 > 0:
            raise ValueError("c0 must be positive")
        if not (self.e22[0] > 0 and self.e22_scaled[0] > self.e22[0]):
            raise ValueError(
                "probe (2,2) entries must be positive and increasing in |xi'|"
            )

    @property
    def orders(self):
        return len(self.e22) - 1


def recover_mu_rho(probe):
    """Shear modulus and density from the two (2,2) probe entries.

    mu = c0 sqrt(e22_scaled^2 - e22^2) and rho = (e22^2 - mu^2/c0^2)/mu.
    """
    gap = probe.e22_scaled[0] ** 2 - probe.e22[0] ** 2
    if gap <= 0:
        raise ValueError("probe entries do not satisfy the monotonicity of the forward map")
    mu = probe.c0 * np.sqrt(gap)
    rho = (probe.e22[0] ** 2 - mu**2 / probe.c0**2) / mu
    if rho <= 0:
        raise ValueError(f"recovered density is nonpositive: {rho}")
    return float(mu), float(rho)


def recover_lambda(probe, mu, rho):
    """First Lame modulus from the (1,1)/(3,3) probe ratio and known mu, rho."""
    xi2 = 1.0 / probe.c0**2
    ratio = probe.e11[0] ** 2 / probe.e33[0] ** 2
    denom = ratio * (mu * xi2 + rho) / mu - xi2
    if denom <= 0:
        raise ValueError(f"probe ratio incompatible with a positive p-modulus: {denom}")
    lam = rho / denom - 2 * mu
    if lam + 2 * mu <= 0:
        raise ValueError(f"recovered lam+2mu is nonpositive: {lam + 2 * mu}")
    return float(lam)


def _lame_combo_series(probe, mu_series, rho_series, n):
    """Taylor series of lam + 2 mu from the probe ratio and mu, rho series."""
    xi2 = 1.0 / probe.c0**2
    r = ts.div(ts.mul(ts.from_derivatives(probe.e11[:n]), ts.from_derivatives(probe.e11[:n]), n),
               ts.mul(ts.from_derivatives(probe.e33[:n]), ts.from_derivatives(probe.e33[:n]), n), n)
    inner = ts.add(mu_series * xi2, rho_series, n)
    denom = ts.add(ts.div(ts.mul(r, inner, n), mu_series, n),
                   ts.constant(-xi2, n), n)
    return ts.div(rho_series, denom, n)


def recover_first_derivatives(probe, jet0):
    """First depth derivatives (d lam, d mu, d rho) from order-1 probe data."""
    return recover_higher_derivatives(probe, jet0, 1)


def recover_higher_derivatives(probe, jet_lower, k):
    """k-th depth derivatives given probe derivatives to order k.

    `jet_lower` must hold the recovered values and derivatives through order
    k-1.  Differentiating the three probe identities k times yields a
    triangular system whose leading coefficients match the first-order one:
    2 mu d^k mu / c0^2 from the difference of squares, rho d^k mu + mu d^k rho
    from the density identity, and d^k lam + 2 d^k mu from the modulus combo.
    """
    if probe.orders < k:
        raise ValueError(f"probe set carries {probe.orders} derivative orders, need {k}")
    if jet_lower.order < k - 1:
        raise ValueError(f"lower-order jet carries {jet_lower.order} orders, need {k - 1}")
    c0sq = probe.c0**2
    mu_d = jet_lower.derivatives("mu")[:k]
    rho_d = jet_lower.derivatives("rho")[:k]
    mu = mu_d[0]

    def dk_square(entry):
        # d^k of entry(s)^2 via Leibniz on the derivative stacks
        return sum(comb(k, j) * entry[j] * entry[k - j] for j in range(k + 1))

    # 1. d^k(mu^2) = c0^2 d^k(e22_scaled^2 - e22^2); extract d^k mu
    dk_mu2 = c0sq * (dk_square(probe.e22_scaled) - dk_square(probe.e22))
    cross_mu = sum(comb(k, j) * mu_d[j] * mu_d[k - j] for j in range(1, k))
    dk_mu = (dk_mu2 - cross_mu) / (2 * mu)

    # 2. d^k(rho mu) = d^k(e22^2) - d^k(mu^2)/c0^2; extract d^k rho
    mu_full = np.append(mu_d, dk_mu)
    dk_rhomu = dk_square(probe.e22) - dk_mu2 / c0sq
    cross_rho = sum(comb(k, j) * rho_d[j] * mu_full[k - j] for j in range(k))
    dk_rho = (dk_rhomu - cross_rho) / mu

    # 3. d^k(lam + 2 mu) from the series of the modulus combo
    rho_full = np.append(rho_d, dk_rho)
    n = k + 1
    combo = _lame_combo_series(probe, ts.from_derivatives(mu_full), ts.from_derivatives(rho_full), n)
    dk_l2m = ts.to_derivatives(combo)[k]
    dk_lam = dk_l2m - 2 * dk_mu
    return float(dk_lam), float(dk_mu), float(dk_rho)


def recover_jet(probe, max_order=None):
    """Full recovery: values plus derivatives through `max_order`."""
    max_order = probe.orders if max_order is None else max_order
    mu, rho = recover_mu_rho(probe)
    lam = recover_lambda(probe, mu, rho)
    d_lam, d_mu, d_rho = [], [], []
    for k in range(1, max_order + 1):
        jet = MediumJet(lam, mu, rho, tuple(d_lam), tuple(d_mu), tuple(d_rho))
        dl, dm, dr = recover_higher_derivatives(probe, jet, k)
        d_lam.append(dl); d_mu.append(dm); d_rho.append(dr)
    return MediumJet(lam, mu, rho, tuple(d_lam), tuple(d_mu), tuple(d_rho))


# ---------------------------------------------------------------------------
# forward probe generation (oracles for round trips and demos)
# ---------------------------------------------------------------------------

def _entry_series(lam_s, mu_s, rho_s, xi, n):
    """Taylor series of the three diagonal DN entries at frequency xi.

    e22 = sqrt(mu^2 xi^2 + rho mu); e11 = gamma*c*mu and e33 = c*(lam+2mu)
    with the closed-form gamma and c, all as truncated series in depth.
    """
    l2m = ts.add(lam_s, 2 * mu_s, n)
    mu2 = ts.mul(mu_s, mu_s, n)
    rhomu = ts.mul(rho_s, mu_s, n)
    e22 = ts.sqrt(ts.add(mu2 * xi**2, rhomu, n), n)

    s_body = ts.add(ts.mul(mu_s, ts.constant(xi**2, n), n), rho_s, n)   # mu xi^2 + rho
    p_body = ts.add(ts.mul(l2m, ts.constant(xi**2, n), n), rho_s, n)    # (lam+2mu) xi^2 + rho
    gamma = ts.sqrt(ts.div(ts.mul(p_body, l2m, n), ts.mul(mu_s, s_body, n), n), n)
    one_pg = ts.add(ts.constant(1.0, n), gamma, n)
    lpm = ts.add(lam_s, mu_s, n)
    rad = ts.add(ts.div(ts.mul(ts.mul(one_pg, one_pg, n), s_body, n), l2m, n),
                 -ts.div(ts.mul(ts.mul(lpm, lpm, n), ts.constant(xi**2, n), n),
                         ts.mul(mu_s, l2m, n), n), n)
    c = ts.div(ts.sqrt(rad, n), one_pg, n)
    a = ts.mul(gamma, c, n)
    e11 = ts.mul(a, mu_s, n)
    e33 = ts.mul(c, l2m, n)
    return e22, e11, e33


def probes_from_profile(profile, s, c0=1.0, orders=0):
    """Analytic probe set at depth s by Taylor arithmetic on the closed forms.

    This is the exact forward oracle: the probe entries and their depth
    derivatives are computed by series composition of the closed-form
    expressions with the profile's exact jets.
    """
    n = orders + 1
    jet = profile.jet(s, k_max=orders)
    lam_s = ts.from_derivatives(jet.derivatives("lam"))
    mu_s = ts.from_derivatives(jet.derivatives("mu"))
    rho_s = ts.from_derivatives(jet.derivatives("rho"))
    e22_lo, e11, e33 = _entry_series(lam_s, mu_s, rho_s, 1.0 / c0, n)
    e22_hi, _, _ = _entry_series(lam_s, mu_s, rho_s, _SQRT2 / c0, n)
    return ProbeSet(e22=ts.to_derivatives(e22_lo), e22_scaled=ts.to_derivatives(e22_hi),
                    e11=ts.to_derivatives(e11), e33=ts.to_derivatives(e33), c0=c0)


_FD_WEIGHTS = {
    # centered stencils, error O(step^4); offsets -3..3
    1: (np.array([0, 1 / 12, -2 / 3, 0, 2 / 3, -1 / 12, 0]), 1),
    2: (np.array([0, -1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12, 0]), 2),
    3: (np.array([1 / 8, -1, 13 / 8, 0, -13 / 8, 1, -1 / 8]), 3),
}


def probes_by_finite_differences(profile, s, c0=1.0, orders=1, step=None):
    """Probe derivatives by order-4 centered differences of the entry values.

    Used when the symbol source only provides values: the step defaults to
    an h^(2/3)-style compromise between truncation and cancellation; here
    the noise floor is machine precision, so 0.04 of the profile span works.
    """
    if orders > 3:
        raise ValueError("finite-difference probes implemented through order 3")
    span = profile.s_max - profile.s_min
    step = 0.04 * span if step is None else step
    offsets = np.arange(-3, 4)
    stack = [probes_from_profile(profile, s + j * step, c0, orders=0) for j in offsets]

    def deriv_stack(name):
        vals = np.array([getattr(p, name)[0] for p in stack])
        out = [vals[3]]
        for k in range(1, orders + 1):
            w, p = _FD_WEIGHTS[k]
            out.append(float(w @ vals) / step**k)
        return np.array(out)

    return ProbeSet(e22=deriv_stack("e22"), e22_scaled=deriv_stack("e22_scaled"),
                    e11=deriv_stack("e11"), e33=deriv_stack("e33"), c0=c0)


def probes_from_symbols(lam0_base, lam0_scaled, c0=1.0, derivative_stacks=None):
    """Assemble a ProbeSet from DN symbol matrices in the rotated frame.

    lam0_base / lam0_scaled are the 3x3 principal symbols at |xi'| = 1/c0
    and sqrt(2)/c0 with the frequency along the first axis.  Optional
    `derivative_stacks` = (stack_base, stack_scaled) supply lists of 3x3
    matrices holding depth derivatives of the same symbols, order by order.
    """
    base = [np.asarray(lam0_base)]
    scaled = [np.asarray(lam0_scaled)]
    if derivative_stacks is not None:
        base += [np.asarray(m) for m in derivative_stacks[0]]
        scaled += [np.asarray(m) for m in derivative_stacks[1]]
    return ProbeSet(
        e22=np.array([np.real(m[1, 1]) for m in base]),
        e22_scaled=np.array([np.real(m[1, 1]) for m in scaled]),
        e11=np.array([np.real(m[0, 0]) for m in base]),
        e33=np.array([np.real(m[2, 2]) for m in base]),
        c0=c0,
    )


def overdetermined_mu_rho(entries):
    """Least-squares (mu, rho) from (2,2) entries at many frequencies.

    Robustness extension beyond the two-frequency scheme: fits
    entry^2 = mu^2 xi^2 + rho mu linearly in (mu^2, rho mu) over all
    supplied (xi, entry) pairs.  Needs at least two distinct frequencies.
    """
    pairs = np.asarray(entries, dtype=float)
    if pairs.ndim != 2 or pairs.shape[0] < 2 or pairs.shape[1] != 2:
        raise ValueError("need an (n, 2) array of (xi, entry) pairs with n >= 2")
    if len(np.unique(pairs[:, 0])) < 2:
        raise ValueError("need at least two distinct probe frequencies")
    design = np.column_stack([pairs[:, 0] ** 2, np.ones(len(pairs))])
    coef, *_ = np.linalg.lstsq(design, pairs[:, 1] ** 2, rcond=None)
    mu2, rhomu = coef
    if mu2 <= 0 or rhomu <= 0:
        raise ValueError(f"least-squares fit left the admissible region: {coef}")
    mu = float(np.sqrt(mu2))
    return mu, float(rhomu / mu)
