"""Isotropic elastic media, depth profiles, and boundary charts.

Media are described by the two Lame moduli and the mass density,
nondimensionalized, together with their depth derivatives at a point
(a "jet").  Depth profiles are laterally homogeneous: the moduli depend
only on the distance-to-boundary coordinate s.  A boundary chart holds
the Jacobian of the boundary normal coordinates; the desk-scale solvers
only exercise the flat chart (identity Jacobian), but constant non-trivial
Jacobians are accepted by the symbol assembly.

Units: a single probe-scaling constant c0 > 0 (default 1) is threaded
through the reconstruction module; everything here is dimensionless.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import make_interp_spline


@dataclass(frozen=True)
class MediumJet:
    """Lame moduli and density with their depth derivatives at one point.

    Parameters
    ----------
    lam, mu, rho : float
        First Lame modulus, shear modulus, and density.  Must satisfy
        mu > 0, lam + 2*mu > 0, rho > 0 (strong ellipticity and positivity).
    d_lam, d_mu, d_rho : tuple of float
        k-th depth derivatives, entry k-1 holding the k-th derivative.
        All three tuples must have the same length.
    """

    lam: float
    mu: float
    rho: float
    d_lam: tuple = ()
    d_mu: tuple = ()
    d_rho: tuple = ()

    def __post_init__(self):
        if not (self.mu > 0 and self.lam + 2 * self.mu > 0 and self.rho > 0):
            raise ValueError(
                "medium violates mu > 0, lam + 2 mu > 0, rho > 0: "
                f"lam={self.lam}, mu={self.mu}, rho={self.rho}"
            )
        if not (len(self.d_lam) == len(self.d_mu) == len(self.d_rho)):
            raise ValueError("derivative tuples must share one length")
        object.__setattr__(self, "d_lam", tuple(float(x) for x in self.d_lam))
        object.__setattr__(self, "d_mu", tuple(float(x) for x in self.d_mu))
        object.__setattr__(self, "d_rho", tuple(float(x) for x in self.d_rho))

    @property
    def order(self):
        """Number of stored derivative orders."""
        return len(self.d_lam)

    def derivatives(self, name):
        """Value plus derivatives of one parameter as an array [f, f', f'', ...]."""
        value = getattr(self, name)
        devs = getattr(self, "d_" + name)
        return np.array([value, *devs], dtype=float)


@dataclass(frozen=True)
class BoundaryChart:
    """Jacobian of boundary normal coordinates and the induced metric.

    The metric is derived as G = J J^T, so the chart-consistency invariant
    holds by construction.  The flat chart has J = I.
    """

    jacobian: np.ndarray

    def __post_init__(self):
        jac = np.asarray(self.jacobian, dtype=float)
        if jac.shape != (3, 3):
            raise ValueError("jacobian must be 3x3")
        if abs(np.linalg.det(jac)) < 1e-12:
            raise ValueError("jacobian is singular")
        object.__setattr__(self, "jacobian", jac)

    @classmethod
    def flat(cls):
        return cls(np.eye(3))

    @property
    def metric(self):
        return self.jacobian @ self.jacobian.T

    @property
    def is_flat(self):
        return np.allclose(self.jacobian, np.eye(3), atol=1e-14)


@dataclass(frozen=True)
class CotangentPoint:
    """A point (y', eta') on the boundary cotangent bundle at depth s.

    ``eta3`` is the optional normal frequency used when evaluating the
    full quadratic pencil rather than its depth factors.
    """

    y_prime: tuple = (0.0, 0.0)
    eta_prime: tuple = (1.0, 0.0)
    eta3: complex | None = None
    s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "y_prime", tuple(float(v) for v in self.y_prime))
        object.__setattr__(self, "eta_prime", tuple(float(v) for v in self.eta_prime))

    @property
    def xi_norm(self):
        return float(np.hypot(*self.eta_prime))


def elasticity_tensor(jet):
    """Rank-4 isotropic stiffness tensor for a jet.

    Returns C[i,j,k,l] = lam d_ij d_kl + mu (d_ik d_jl + d_il d_jk), which
    carries the minor and major symmetries C_ijkl = C_jikl = C_klij.
    """
    eye = np.eye(3)
    c = jet.lam * np.einsum("ij,kl->ijkl", eye, eye)
    c += jet.mu * (np.einsum("ik,jl->ijkl", eye, eye) + np.einsum("il,jk->ijkl", eye, eye))
    return c


def acoustic_tensor(tensor, direction):
    """Contraction Gamma_ik = sum_jl C_ijkl n_j n_l for a unit direction n."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    return np.einsum("ijkl,j,l->ik", tensor, n, n)


class _PolyFuncs:
    """Exact polynomial backend; derivatives of any order are analytic."""

    def __init__(self, coeffs):
        self._poly = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        self._cache = {0: self._poly}

    def eval(self, s, k=0):
        if k not in self._cache:
            self._cache[k] = self._poly.deriv(k)
        return float(self._cache[k](s))

    def eval_array(self, s):
        return np.asarray(self._poly(np.asarray(s, dtype=float)), dtype=float)

    max_order = None  # unlimited


class _SplineFuncs:
    """Interpolating-spline backend; derivatives limited to the spline degree."""

    def __init__(self, depth, values, order):
        self._spl = make_interp_spline(depth, values, k=order)
        self._cache = {0: self._spl}
        self.max_order = order

    def eval(self, s, k=0):
        if k not in self._cache:
            self._cache[k] = self._spl.derivative(k)
        return float(self._cache[k](s))

    def eval_array(self, s):
        return np.asarray(self._spl(np.asarray(s, dtype=float)), dtype=float)


class StratifiedProfile:
    """Laterally homogeneous medium lam(s), mu(s), rho(s) on a depth interval.

    Built either from node values (interpolating spline of a configurable
    order, exactly reproducing at the nodes and reproducing polynomials up
    to the spline degree) or from polynomial coefficients (exact analytic
    derivatives of every order).  Evaluation outside [s_min, s_max] is an
    error, as is requesting a derivative order beyond what the interpolant
    can represent.
    """

    def __init__(self, depth_grid, funcs, order):
        depth_grid = np.asarray(depth_grid, dtype=float)
        if depth_grid.ndim != 1 or depth_grid.size < 2:
            raise ValueError("depth grid needs at least two nodes")
        if not np.all(np.diff(depth_grid) > 0):
            raise ValueError("depth grid must be strictly increasing")
        self.depth_grid = depth_grid
        self._funcs = funcs  # dict name -> backend
        self.order = order
        for s in depth_grid:
            self.jet(s)  # validates positivity at the nodes

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_arrays(cls, depth, lam, mu, rho, order=3):
        depth = np.asarray(depth, dtype=float)
        arrays = {"lam": np.asarray(lam, float), "mu": np.asarray(mu, float),
                  "rho": np.asarray(rho, float)}
        for name, arr in arrays.items():
            if arr.shape != depth.shape:
                raise ValueError(f"{name} array does not match the depth grid")
        if depth.size < order + 1:
            raise ValueError(f"order-{order} interpolation needs {order + 1} nodes")
        if not np.all(np.diff(depth) > 0):
            raise ValueError("depth grid must be strictly increasing")
        funcs = {name: _SplineFuncs(depth, arr, order) for name, arr in arrays.items()}
        return cls(depth, funcs, order)

    @classmethod
    def from_polynomials(cls, lam_coeffs, mu_coeffs, rho_coeffs, span=(0.0, 1.0)):
        funcs = {
            "lam": _PolyFuncs(lam_coeffs),
            "mu": _PolyFuncs(mu_coeffs),
            "rho": _PolyFuncs(rho_coeffs),
        }
        degree = max(len(np.atleast_1d(c)) - 1 for c in (lam_coeffs, mu_coeffs, rho_coeffs))
        return cls(np.linspace(span[0], span[1], max(2, degree + 1)), funcs, max(1, degree))

    @classmethod
    def constant(cls, lam, mu, rho, span=(0.0, 1.0)):
        return cls.from_polynomials([lam], [mu], [rho], span)

    @classmethod
    def from_file(cls, path, order=3):
        """Parse a profile file: CSV with a header row depth,lambda,mu,rho."""
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ValueError(f"{path}: empty profile file")
            fields = [name.strip() for name in reader.fieldnames]
            required = {"depth", "lambda", "mu", "rho"}
            if not required.issubset(fields):
                raise ValueError(f"{path}: header must contain {sorted(required)}")
            for rec in reader:
                try:
                    rows.append(tuple(float(rec[key]) for key in ("depth", "lambda", "mu", "rho")))
                except (TypeError, KeyError, ValueError) as exc:
                    raise ValueError(f"{path}: bad record {rec}") from exc
        if len(rows) < 2:
            raise ValueError(f"{path}: need at least two records")
        data = np.array(rows, dtype=float)
        if not np.all(np.isfinite(data)):
            raise ValueError(f"{path}: non-finite entries")
        depth = data[:, 0]
        if not np.all(np.diff(depth) > 0):
            raise ValueError(f"{path}: depth grid is not strictly increasing")
        order = min(order, len(rows) - 1)
        return cls.from_arrays(depth, data[:, 1], data[:, 2], data[:, 3], order=order)

    # -- evaluation ------------------------------------------------------

    @property
    def s_min(self):
        return float(self.depth_grid[0])

    @property
    def s_max(self):
        return float(self.depth_grid[-1])

    @property
    def max_derivative_order(self):
        caps = [f.max_order for f in self._funcs.values()]
        return None if any(c is None for c in caps) else min(caps)

    def jet(self, s, k_max=0):
        """Interpolated MediumJet at depth s with derivatives up to k_max."""
        if not (self.s_min - 1e-12 <= s <= self.s_max + 1e-12):
            raise ValueError(f"depth {s} outside [{self.s_min}, {self.s_max}]")
        cap = self.max_derivative_order
        if cap is not None and k_max > cap:
            raise ValueError(
                f"derivative order {k_max} exceeds the interpolant order {cap}"
            )
        vals = {name: fn.eval(s) for name, fn in self._funcs.items()}
        devs = {name: tuple(fn.eval(s, k) for k in range(1, k_max + 1))
                for name, fn in self._funcs.items()}
        return MediumJet(vals["lam"], vals["mu"], vals["rho"],
                         devs["lam"], devs["mu"], devs["rho"])

    def parameter_arrays(self, s):
        """Vectorized (lam, mu, rho) values on an array of depths."""
        s = np.asarray(s, dtype=float)
        if s.size and (s.min() < self.s_min - 1e-12 or s.max() > self.s_max + 1e-12):
            raise ValueError("depths outside the profile range")
        return tuple(self._funcs[n].eval_array(s) for n in ("lam", "mu", "rho"))

    @property
    def node_jets(self):
        k = 1 if (self.max_derivative_order is None or self.max_derivative_order >= 1) else 0
        return [self.jet(s, k) for s in self.depth_grid]

    def wave_speeds(self, s):
        """(c_p, c_s) at depth s."""
        j = self.jet(s)
        return np.sqrt((j.lam + 2 * j.mu) / j.rho), np.sqrt(j.mu / j.rho)
