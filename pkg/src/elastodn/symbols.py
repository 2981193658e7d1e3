"""Quadratic pencil of the transformed elastic operator and its factorization.

For a cotangent point with tangential frequency eta' and Laplace direction
tau_hat (unit modulus, positive real part), the principal part of the
transformed operator is the quadratic matrix pencil

    M(z) = nn * z**2 + (mn + mn^T) * z + mm + rho * tau_hat**2 * G,

where nn, mn, mm are the normal-normal, mixed, and tangential-tangential
contractions of the stiffness tensor in boundary normal coordinates.  The
pencil factors as

    M(z) = (z - minus) nn (z - plus)

with Spec(plus) in the upper half plane and Spec(minus) in the lower one;
`plus` propagates fields that decay with depth for Re tau > 0.  Two
independent constructions are provided: closed forms (rotation-reduced
scalar formulas) and a spectral route through the companion linearization
of the pencil, with a contour-integral projector as a slower cross-check.

`minus` is the left cofactor appearing in the factorization identity (the
adjoint of `plus` for real tau).  It is not a right solvent of the pencil;
the lower-half-plane right solvent needed by the wave splitting is kept
separately as `minus_right` (equal to conj(plus) for real tau).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .medium import CotangentPoint, MediumJet, elasticity_tensor

_IM_GUARD = 1e-12  # eigenvalues closer than this to the real axis are a fault

# default normal-frequency test values for factorization residuals
_ETA3_TEST = (0.0, 0.35, -1.2, 2.0, 1.0 + 0.5j, -0.7 - 0.3j, 3.1j, 0.25 - 2.2j)


def _normalize_tau_hat(tau_hat):
    t = complex(tau_hat)
    if t.real <= 0:
        raise ValueError(f"tau must have positive real part, got {t}")
    return t / abs(t)


@dataclass(frozen=True)
class SymbolTriple:
    """Pencil coefficient blocks at one cotangent point.

    nn, mn, mm are the <normal,normal>, <mixed,normal>, <tangential,tangential>
    contractions of the stiffness tensor with the tangential frequency;
    metric is the induced boundary-coordinate metric, rho the density, and
    tau_hat the unit Laplace direction (1 for real tau).
    """

    nn: np.ndarray
    mn: np.ndarray
    mm: np.ndarray
    metric: np.ndarray
    rho: float
    tau_hat: complex = 1.0

    @property
    def weight(self):
        """Zeroth-order block mm + rho * tau_hat**2 * metric."""
        return self.mm + self.rho * self.tau_hat**2 * self.metric


@dataclass(frozen=True)
class ClosedFormFactors:
    """Scalar ingredients of the rotation-reduced factor formulas.

    ``coupling`` and ``decay`` are the 3x3 blocks such that, in the rotated
    frame, the upward factor is Dd^{-1/2} (coupling + i*decay) Dd^{1/2} with
    Dd = diag(mu, mu, lam + 2 mu).  ``rotation`` maps the rotated frame back
    to the chart frame (identity when the tangential frequency vanishes).
    a = gamma * c and alpha2 = gamma * alpha1 hold exactly.
    """

    alpha1: complex
    alpha2: complex
    a: complex
    b: complex
    c: complex
    gamma: complex
    rotation: np.ndarray
    coupling: np.ndarray
    decay: np.ndarray
    # context needed to rebuild the pencil and conjugate into chart frames
    lam: float
    mu: float
    rho: float
    xi_prime: tuple
    tau_hat: complex


@dataclass(frozen=True)
class Factorization:
    """First-order depth factors of the quadratic pencil.

    plus : upper-half-plane right solvent (fields decaying with depth).
    minus : left cofactor of the factorization identity; adjoint of plus
        for real tau.
    minus_right : lower-half-plane right solvent (conj(plus) for real tau);
        used by the incoming/outgoing splitting.
    residual : relative factorization residual max_z ||M(z) - (z-minus) nn
        (z-plus)||_F / ||M(z)||_F over the test frequencies.
    """

    plus: np.ndarray
    minus: np.ndarray
    minus_right: np.ndarray
    eig_plus: np.ndarray
    eig_minus: np.ndarray
    residual: float


def assemble_triple(jet, chart, point, tau_hat=1.0):
    """Contract the stiffness tensor into the pencil blocks at a point.

    Parameters
    ----------
    jet : MediumJet
    chart : BoundaryChart
        The stiffness tensor is pushed forward with the chart Jacobian
        before contracting, so a flat chart reproduces the Cartesian blocks.
    point : CotangentPoint
        Supplies the tangential frequency eta'.
    tau_hat : complex
        Laplace direction; normalized to unit modulus, Re > 0 required.
    """
    tau_hat = _normalize_tau_hat(tau_hat)
    jac = chart.jacobian
    c = elasticity_tensor(jet)
    if not chart.is_flat:
        c = np.einsum("ai,bj,ck,dl,ijkl->abcd", jac, jac, jac, jac, c)
    eta = np.asarray(point.eta_prime, dtype=float)
    nn = c[:, 2, :, 2].copy()
    mn = np.einsum("ijk,j->ik", c[:, :2, :, 2], eta)
    mm = np.einsum("ijkl,j,l->ik", c[:, :2, :, :2], eta, eta)
    return SymbolTriple(nn=nn, mn=mn, mm=mm, metric=chart.metric,
                        rho=jet.rho, tau_hat=tau_hat)


def pencil_value(triple, eta3):
    """Evaluate the quadratic pencil at normal frequency eta3."""
    z = complex(eta3)
    sym = triple.mn + triple.mn.T
    return triple.nn * z**2 + sym * z + triple.weight


def _checked_sqrt(z, what):
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0:
        raise RuntimeError(f"radicand for {what} on the branch cut: {z}")
    return np.sqrt(z)


def closed_form_factors(jet, xi_prime, tau_hat=1.0):
    """Closed-form scalars and blocks of the depth factors.

    All square roots use the principal branch on C minus the negative real
    axis (positive real part); a radicand landing on the cut is a numerical
    fault (impossible for Re tau > 0) and raises RuntimeError.
    """
    tau_hat = _normalize_tau_hat(tau_hat)
    lam, mu, rho = jet.lam, jet.mu, jet.rho
    xi_vec = np.asarray(xi_prime, dtype=float)
    xi = float(np.linalg.norm(xi_vec))
    l2m = lam + 2 * mu
    t2 = tau_hat**2

    gamma = _checked_sqrt((l2m * xi**2 + rho * t2) * l2m / (mu * (mu * xi**2 + rho * t2)),
                          "gamma")
    alpha1 = (lam + mu) * xi / np.sqrt(mu * l2m) / (1 + gamma)
    alpha2 = gamma * alpha1
    b = _checked_sqrt((mu * xi**2 + rho * t2) / mu, "b")
    c = _checked_sqrt((1 + gamma)**2 * (mu * xi**2 + rho * t2) / l2m
                      - (lam + mu)**2 * xi**2 / (mu * l2m), "c") / (1 + gamma)
    a = gamma * c

    if xi > 0:
        x1, x2 = xi_vec / xi
        rotation = np.array([[x1, x2, 0.0], [x2, -x1, 0.0], [0.0, 0.0, 1.0]])
    else:
        # never referenced by the formulas at xi = 0 (coupling block vanishes)
        rotation = np.eye(3)
    core = np.array([[0, 0, -alpha1], [0, 0, 0], [-alpha2, 0, 0]], dtype=complex)
    coupling = rotation @ core @ rotation.T
    decay = rotation @ np.diag([a, b, c]).astype(complex) @ rotation.T
    return ClosedFormFactors(alpha1=alpha1, alpha2=alpha2, a=a, b=b, c=c, gamma=gamma,
                             rotation=rotation, coupling=coupling, decay=decay,
                             lam=lam, mu=mu, rho=rho,
                             xi_prime=tuple(xi_vec), tau_hat=tau_hat)


def _triple_from_factors(factors, chart):
    jet = MediumJet(factors.lam, factors.mu, factors.rho)
    point = CotangentPoint(eta_prime=factors.xi_prime)
    return assemble_triple(jet, chart, point, factors.tau_hat)


def factorization_residual(fact, triple, eta3_values=_ETA3_TEST):
    """Relative factorization residual over a set of test frequencies."""
    eye = np.eye(3)
    worst = 0.0
    for z in eta3_values:
        m = pencil_value(triple, z)
        trial = (z * eye - fact.minus) @ triple.nn @ (z * eye - fact.plus)
        worst = max(worst, np.linalg.norm(m - trial) / np.linalg.norm(m))
    return worst


def _certify(plus, minus, minus_right, triple, residual_tol=1e-10):
    eig_plus = np.linalg.eigvals(plus)
    eig_minus = np.linalg.eigvals(minus)
    if np.min(eig_plus.imag) < _IM_GUARD:
        raise RuntimeError(f"upward factor eigenvalue off the upper half plane: {eig_plus}")
    if np.max(eig_minus.imag) > -_IM_GUARD:
        raise RuntimeError(f"downward factor eigenvalue off the lower half plane: {eig_minus}")
    fact = Factorization(plus=plus, minus=minus, minus_right=minus_right,
                         eig_plus=eig_plus, eig_minus=eig_minus, residual=0.0)
    res = factorization_residual(fact, triple)
    if res > residual_tol:
        raise RuntimeError(f"factorization residual {res:.3e} exceeds {residual_tol:.1e}")
    return Factorization(plus=plus, minus=minus, minus_right=minus_right,
                         eig_plus=eig_plus, eig_minus=eig_minus, residual=res)


def closed_form_factorization(factors, nn, chart, triple=None):
    """Assemble the Factorization from closed-form blocks.

    The factors are conjugated out of the rotated frame with the medium
    weights diag(mu, mu, lam+2mu)^{1/2} and the chart Jacobian.  The
    eigenvalue half-plane certificates and the factorization residual are
    verified before returning.

    Non-flat charts must keep the normal coordinate untouched (Jacobian
    with third row and column e3, a tangential reparametrization); the
    factors are then built at the Cartesian frequency xi' = A^T eta' and
    the assembled chart-frame `triple` must be passed for the residual.
    """
    dd = np.array([factors.mu, factors.mu, factors.lam + 2 * factors.mu])
    d_half = np.diag(np.sqrt(dd))
    d_ihalf = np.diag(1 / np.sqrt(dd))
    jac = chart.jacobian
    jt = jac.T
    jt_inv = np.linalg.inv(jt)
    if np.linalg.norm(nn - jac @ np.diag(dd) @ jt) > 1e-10 * np.linalg.norm(nn):
        raise ValueError(
            "nn block inconsistent with the factors' medium (for non-flat "
            "charts the Jacobian must leave the normal coordinate untouched)"
        )

    plus = jt_inv @ d_ihalf @ (factors.coupling + 1j * factors.decay) @ d_half @ jt
    minus = jac @ d_half @ (factors.coupling.T - 1j * factors.decay.T) @ d_ihalf @ np.linalg.inv(jac)
    minus_right = jt_inv @ d_ihalf @ (factors.coupling - 1j * factors.decay) @ d_half @ jt

    if triple is None:
        if not chart.is_flat:
            raise ValueError("non-flat charts need the assembled triple")
        triple = _triple_from_factors(factors, chart)
    return _certify(plus, minus, minus_right, triple)


def _companion(triple):
    nn_inv = np.linalg.inv(triple.nn)
    sym = triple.mn + triple.mn.T
    top = np.hstack([np.zeros((3, 3)), np.eye(3)])
    bottom = np.hstack([-nn_inv @ triple.weight, -nn_inv @ sym])
    return np.vstack([top, bottom]).astype(complex)


def _solvent_from_eigs(eigvals, eigvecs, picked):
    basis = eigvecs[:3, picked]
    if abs(np.linalg.det(basis)) < 1e-14:
        raise RuntimeError("degenerate displacement parts of the pencil eigenvectors")
    return basis @ np.diag(eigvals[picked]) @ np.linalg.inv(basis)


def spectral_factorization(triple, method="eig"):
    """Factor the pencil independently of the closed forms.

    method="eig" linearizes the pencil to the 6x6 companion matrix, splits
    the eigenpairs by half plane, and forms the right solvents from the
    displacement parts of the eigenvectors; the left cofactor follows from
    the first-order coefficient identity minus = -((mn+mn^T) + nn plus) nn^{-1}.
    method="contour" evaluates the spectral-projector moment quotient by
    trapezoid quadrature on circles enclosing each half-plane root cluster
    (slower; exponentially convergent since the integrand is analytic there).

    Raises RuntimeError when any pencil eigenvalue sits within 1e-12 of the
    real axis (loss of half-plane separation means invalid inputs).
    """
    comp = _companion(triple)
    eigvals, eigvecs = np.linalg.eig(comp)
    if np.min(np.abs(eigvals.imag)) < _IM_GUARD:
        raise RuntimeError(
            f"pencil eigenvalue within {_IM_GUARD:.0e} of the real axis: {eigvals}"
        )
    up = np.where(eigvals.imag > 0)[0]
    down = np.where(eigvals.imag < 0)[0]
    if len(up) != 3 or len(down) != 3:
        raise RuntimeError(f"expected a 3+3 half-plane split, got {eigvals}")

    if method == "eig":
        plus = _solvent_from_eigs(eigvals, eigvecs, up)
        minus_right = _solvent_from_eigs(eigvals, eigvecs, down)
    elif method == "contour":
        plus = _contour_solvent(triple, eigvals[up])
        minus_right = _contour_solvent(triple, eigvals[down])
    else:
        raise ValueError(f"unknown method {method!r}")

    nn = triple.nn
    sym = triple.mn + triple.mn.T
    minus = -(sym + nn @ plus) @ np.linalg.inv(nn)
    return _certify(plus, minus, minus_right, triple)


def _contour_solvent(triple, roots, n_nodes=256):
    """Moment-quotient right solvent from a circular contour around `roots`."""
    center = complex(np.mean(roots))
    spread = max(np.max(np.abs(roots - center)), 1e-3 * abs(center))
    min_im = np.min(np.abs(roots.imag))
    radius = min(1.5 * spread + 0.25 * min_im, abs(center.imag) - 0.25 * min_im)
    if radius < spread:
        raise RuntimeError("cannot place a half-plane contour around the roots")

    nn = triple.nn
    w, v = np.linalg.eigh(nn)
    nn_half = v @ np.diag(np.sqrt(w)) @ v.T
    nn_ihalf = v @ np.diag(1 / np.sqrt(w)) @ v.T
    sym1 = nn_ihalf @ (triple.mn + triple.mn.T) @ nn_ihalf
    w0 = nn_ihalf @ triple.weight @ nn_ihalf

    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    zs = center + radius * np.exp(1j * theta)
    dz = 1j * radius * np.exp(1j * theta) * (2 * np.pi / n_nodes)
    m0 = np.zeros((3, 3), complex)
    m1 = np.zeros((3, 3), complex)
    eye = np.eye(3)
    for z, d in zip(zs, dz):
        inv = np.linalg.inv(eye * z**2 + sym1 * z + w0)
        m0 += inv * d
        m1 += inv * (z * d)
    s_tilde = m1 @ np.linalg.inv(m0)
    return nn_ihalf @ s_tilde @ nn_half


def random_triple_draw(rng, complex_tau=False):
    """One admissible random parameter draw for factorization sweeps.

    Returns (jet, point, tau_hat) with mu in [0.5, 5], lam in (-2mu+0.1, 5],
    rho in [0.2, 5], |xi'| in [0.01, 10], and Re tau_hat > 0.05.
    """
    mu = rng.uniform(0.5, 5.0)
    lam = rng.uniform(-2 * mu + 0.1, 5.0)
    rho = rng.uniform(0.2, 5.0)
    xi = rng.uniform(0.01, 10.0)
    ang = rng.uniform(0, 2 * np.pi)
    jet = MediumJet(lam, mu, rho)
    point = CotangentPoint(eta_prime=(xi * np.cos(ang), xi * np.sin(ang)))
    if complex_tau:
        phase = rng.uniform(-np.arccos(0.05), np.arccos(0.05))
        tau_hat = complex(np.cos(phase), np.sin(phase))
    else:
        tau_hat = 1.0
    return jet, point, tau_hat
