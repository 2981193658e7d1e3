import numpy as np
import pytest
from scipy.linalg import expm

from elastodn import (BoundaryChart, CotangentPoint, LaplaceProbe, MediumJet,
                      StratifiedProfile, assemble_triple, bridge_check,
                      closed_form_factors, closed_form_factorization,
                      discrete_energy, dn_matrix, elliptic_dn_solve,
                      extract_dn_symbol, finite_laplace_transform,
                      principal_dn_symbol, stability_limit, subprincipal_map,
                      time_domain_solve, window_multiplier)
from elastodn.dn import _triple_derivative, dn_depth_derivative

FLAT = BoundaryChart.flat()
CONST = StratifiedProfile.constant(2.0, 1.0, 1.0, span=(0.0, 30.0))


def lam0_of(jet, eta):
    triple = assemble_triple(jet, FLAT, CotangentPoint(eta_prime=eta))
    fact = closed_form_factorization(closed_form_factors(jet, eta), triple.nn, FLAT)
    return principal_dn_symbol(fact, triple), triple, fact


# ---------------------------------------------------------------------------
# window and transform
# ---------------------------------------------------------------------------

def test_window_multiplier_closed_form():
    # p = 2: (2 - e^{-tau T}(tau^2 T^2 + 2 tau T + 2))/tau^3
    for tau, T in [(1.0, 20.0), (2.5, 4.0), (3 + 2j, 5.0)]:
        direct = (2 - np.exp(-tau * T) * (tau**2 * T**2 + 2 * tau * T + 2)) / tau**3
        assert window_multiplier(tau, T) == pytest.approx(direct, rel=1e-13)
    assert abs(window_multiplier(1.0, 20.0) - 2.0) < 1e-6


def test_window_multiplier_long_horizon_limit():
    for tau in (1.0, 4.0, 2 + 1j):
        assert window_multiplier(tau, 200.0 / abs(tau)) == pytest.approx(
            2.0 / tau**3, rel=1e-12)


def test_window_multiplier_matches_quadrature():
    tau, T = 1.7, 6.0
    dt = T / 6000
    tt = np.arange(6001) * dt
    quad = finite_laplace_transform(tt**2, dt, tau)
    assert quad == pytest.approx(window_multiplier(tau, T), rel=1e-10)


def test_finite_laplace_closed_form_t_squared():
    tau, T = 1.0, 3.0
    dt = T / 4000
    tt = np.arange(4001) * dt
    expected = 2 - np.exp(-T) * (T**2 + 2 * T + 2)
    assert finite_laplace_transform(tt**2, dt, tau) == pytest.approx(expected, rel=1e-10)


def test_finite_laplace_zero_and_coarse_dt():
    assert finite_laplace_transform(np.zeros(101), 0.01, 2.0) == 0
    with pytest.raises(ValueError):
        finite_laplace_transform(np.zeros(11), 0.5, 1.0 + 4.0j)


# ---------------------------------------------------------------------------
# elliptic depth solver
# ---------------------------------------------------------------------------

def test_elliptic_constant_medium_matches_matrix_exponential():
    probe = LaplaceProbe(tau=4.0)
    jet = CONST.jet(0.0)
    _, triple, fact = lam0_of(jet, (1.0, 0.0))
    psi = np.array([0.4, -0.2, 1.0], complex)
    sol = elliptic_dn_solve(CONST, (1.0, 0.0), probe, psi)
    for k in range(0, len(sol.depth_grid), 16):
        s = sol.depth_grid[k]
        exact = expm(1j * s * fact.plus / probe.h) @ psi
        assert np.linalg.norm(sol.v[k] - exact) <= 1e-8
    # decay into depth for the constant medium
    assert np.linalg.norm(sol.v[-1]) <= np.linalg.norm(sol.v[0])


def test_elliptic_constant_medium_traction_exact():
    probe = LaplaceProbe(tau=4.0)
    jet = CONST.jet(0.0)
    lam0, triple, fact = lam0_of(jet, (1.0, 0.0))
    for psi in np.eye(3):
        sol = elliptic_dn_solve(CONST, (1.0, 0.0), probe, psi)
        assert np.linalg.norm(sol.traction - lam0 @ psi) <= 1e-8


def test_elliptic_zero_data():
    probe = LaplaceProbe(tau=4.0)
    sol = elliptic_dn_solve(CONST, (1.0, 0.0), probe, np.zeros(3))
    assert np.all(sol.v == 0) and np.all(sol.traction == 0)


def test_elliptic_truncation_closure_converges():
    probe = LaplaceProbe(tau=4.0)
    jet = CONST.jet(0.0)
    lam0, *_ = lam0_of(jet, (1.0, 0.0))
    dn_trunc = dn_matrix(CONST, (1.0, 0.0), probe, closure="truncate",
                         depth_factor=20.0)
    assert np.linalg.norm(dn_trunc - lam0) <= 1e-6


def test_elliptic_complex_tau():
    tau = 4.0 + 2.0j
    probe = LaplaceProbe(tau=tau)
    jet = CONST.jet(0.0)
    triple = assemble_triple(jet, FLAT, CotangentPoint(eta_prime=(1.0, 0.0)),
                             probe.tau_hat)
    fact = closed_form_factorization(
        closed_form_factors(jet, (1.0, 0.0), probe.tau_hat), triple.nn, FLAT)
    lam0 = principal_dn_symbol(fact, triple)
    assert np.linalg.norm(dn_matrix(CONST, (1.0, 0.0), probe) - lam0) <= 1e-8


# ---------------------------------------------------------------------------
# symbol extraction
# ---------------------------------------------------------------------------

LINEAR = StratifiedProfile.from_polynomials([2.0], [1.0, 0.5], [1.0], span=(0.0, 3.0))


def test_extraction_constant_medium_exact_per_h():
    jet = CONST.jet(0.0)
    lam0, *_ = lam0_of(jet, (1.0, 0.0))
    for tau in (5.0, 20.0, 200.0):
        got = dn_matrix(CONST, (1.0, 0.0), LaplaceProbe(tau=tau))
        assert np.linalg.norm(got - lam0) <= 1e-8


def test_extraction_constant_medium_subprincipal_vanishes():
    probes = [LaplaceProbe(tau=1 / h) for h in (0.04, 0.02, 0.01)]
    sym = extract_dn_symbol(CONST, (1.0, 0.0), probes)
    assert np.linalg.norm(sym.lower_terms[0]) <= 1e-6


def test_extraction_first_order_convergence_linear_profile():
    jet = LINEAR.jet(0.0, 1)
    lam0, *_ = lam0_of(MediumJet(jet.lam, jet.mu, jet.rho), (1.0, 0.0))
    errs = [np.linalg.norm(dn_matrix(LINEAR, (1.0, 0.0), LaplaceProbe(tau=1 / h)) - lam0)
            for h in (0.04, 0.02, 0.01)]
    assert 1.7 <= errs[0] / errs[1] <= 2.3
    assert 1.7 <= errs[1] / errs[2] <= 2.3


def test_extracted_subprincipal_matches_recursion():
    # lambda_{-1} from Richardson extraction vs W(D_s lambda0)
    probes = [LaplaceProbe(tau=1 / h) for h in (0.04, 0.02, 0.01)]
    sym = extract_dn_symbol(LINEAR, (1.0, 0.0), probes)
    jet = LINEAR.jet(0.0, 1)
    point = CotangentPoint(eta_prime=(1.0, 0.0))
    triple = assemble_triple(jet, FLAT, point)
    fact = closed_form_factorization(
        closed_form_factors(jet, (1.0, 0.0)), triple.nn, FLAT)
    d_nn, d_mn, _, d_w = _triple_derivative(jet, point, 1.0)
    ds_lam0 = -1j * dn_depth_derivative(triple, fact, d_nn, d_mn, d_w)
    lam_m1 = subprincipal_map(triple, fact, ds_lam0)
    gap = np.linalg.norm(sym.lower_terms[0] - lam_m1) / np.linalg.norm(lam_m1)
    assert gap <= 5e-2


def test_extraction_validates_probes():
    with pytest.raises(ValueError):
        extract_dn_symbol(CONST, (1.0, 0.0), [LaplaceProbe(tau=10.0)])
    with pytest.raises(ValueError):
        extract_dn_symbol(CONST, (1.0, 0.0),
                          [LaplaceProbe(tau=10.0), LaplaceProbe(tau=10.0 + 5.0j)])
    with pytest.raises(RuntimeError):
        # four probes overdetermine the quadratic fit; at O(1) h values the
        # cubic tail leaves a residual far above the forced tolerance
        extract_dn_symbol(LINEAR, (1.0, 0.0),
                          [LaplaceProbe(tau=t) for t in (2.0, 2.5, 3.0, 4.0)],
                          fit_tol=1e-14)


# ---------------------------------------------------------------------------
# time-domain solver
# ---------------------------------------------------------------------------

def test_time_domain_zero_data():
    probe = LaplaceProbe(tau=4.0, T=1.0, window_power=2)
    trace = time_domain_solve(CONST, (1.0, 0.0), probe, np.zeros(3), ds=0.02)
    assert np.all(trace.displacement == 0)
    assert np.all(trace.traction == 0)


def test_time_domain_cfl_violation_raises():
    probe = LaplaceProbe(tau=4.0, T=1.0)
    with pytest.raises(ValueError):
        time_domain_solve(CONST, (1.0, 0.0), probe, np.array([0, 0, 1.0]),
                          ds=0.02, dt=0.5)


def test_time_domain_p_wave_travel_time():
    # eta' = 0 decouples components; CFL = 1 reproduces the 1d wave exactly,
    # so the pulse reaches depth d at t = d / c_p within two time steps
    c_p = np.sqrt(4.0)  # (lam + 2 mu) / rho
    T, d = 1.6, 2.0
    probe = LaplaceProbe(tau=4.0, T=T, window_power=2)
    nt = 3200
    dt = T / nt
    ds = c_p * dt
    trace = time_domain_solve(CONST, (0.0, 0.0), probe, np.array([0, 0, 1.0]),
                              dt=dt, ds=ds, depth=3.4, record_depths=(d,))
    sig = np.abs(trace.receivers[d][:, 2])
    arrival = trace.times[np.argmax(sig > 1e-12 * sig.max())]
    assert abs(arrival - d / c_p) <= 2 * dt
    # shear components never excited
    assert np.max(np.abs(trace.receivers[d][:, :2])) <= 1e-12


def test_time_domain_energy_conservation():
    # compactly supported pulse: once the source is quiet and before anything
    # reaches the bottom, the leapfrog energy invariant is exactly conserved
    t0, T = 0.8, 2.4
    pulse = lambda t: np.sin(np.pi * t / t0) ** 4 if t < t0 else 0.0
    probe = LaplaceProbe(tau=4.0, T=T, window_power=2)
    eta = (0.6, 0.0)
    trace = time_domain_solve(CONST, eta, probe, np.array([0.3, 0.1, 1.0]),
                              window=pulse, depth=6.4, ds=0.004,
                              snapshot_every=200)
    after_source = [snap for snap in trace.snapshots if snap[0] > t0 + 2 * trace.dt]
    assert len(after_source) >= 3
    energies = [discrete_energy(CONST, eta, probe.h, snap, trace.dt, trace.ds)
                for snap in after_source]
    ref = energies[0]
    assert ref > 0
    for e in energies[1:]:
        assert abs(e - ref) <= 1e-8 * ref
        assert e <= ref * (1 + 1e-8)   # non-increasing up to roundoff


def test_time_domain_stability_heterogeneous_cfl08():
    prof = StratifiedProfile.from_polynomials([2.0, 0.3], [1.0, 0.4], [1.0, -0.1],
                                              span=(0.0, 8.0))
    probe = LaplaceProbe(tau=3.0, T=2.0, window_power=2)
    trace = time_domain_solve(prof, (1.2, 0.0), probe, np.array([1.0, 0.5, 1.0]),
                              cfl=0.8, depth=6.0, ds=0.01, sponge_width=80)
    bound = 10 * probe.window(probe.T)
    assert np.max(np.abs(trace.displacement)) <= bound
    assert np.all(np.isfinite(trace.traction))


def test_stability_limit_scales():
    lim_fine = stability_limit(CONST, (1.0, 0.0), 0.25, 0.005)
    lim_coarse = stability_limit(CONST, (1.0, 0.0), 0.25, 0.01)
    assert lim_fine < lim_coarse


# ---------------------------------------------------------------------------
# bridge identity
# ---------------------------------------------------------------------------

def exact_grid(tau, T, c_p, dt_target=1e-3):
    nt = int(np.ceil(T / dt_target))
    if nt % 2 == 1:
        nt += 1
    dt = T / nt
    return dt, c_p * dt


def test_bridge_zero_data():
    probe = LaplaceProbe(tau=4.0, T=2.0, window_power=6)
    assert bridge_check(CONST, (0.0, 0.0), np.zeros(3), probe) == 0.0


def test_bridge_residual_decays_in_horizon():
    tau, c_p = 4.0, 2.0
    resid = {}
    for T in (2.0, 4.0):
        dt, ds = exact_grid(tau, T, c_p)
        probe = LaplaceProbe(tau=tau, T=T, window_power=6)
        resid[T] = bridge_check(CONST, (0.0, 0.0), np.array([0, 0, 1.0]), probe,
                                dt=dt, ds=ds, cfl=1.0)
    slope = (np.log(resid[4.0]) - np.log(resid[2.0])) / 2.0
    assert slope <= -1.5           # exponential decay; the strict -tau/2
    assert resid[4.0] < resid[2.0]  # bound is certified in the acceptance suite


def test_bridge_residual_decays_in_tau():
    T, c_p = 2.0, 2.0
    resid = {}
    for tau in (4.0, 6.0):
        dt, ds = exact_grid(tau, T, c_p)
        probe = LaplaceProbe(tau=tau, T=T, window_power=6)
        resid[tau] = bridge_check(CONST, (0.0, 0.0), np.array([0, 0, 1.0]), probe,
                                  dt=dt, ds=ds, cfl=1.0)
    assert resid[6.0] <= resid[4.0] / 5.0


def test_elliptic_rejects_too_shallow_profile():
    shallow = StratifiedProfile.constant(2.0, 1.0, 1.0, span=(0.0, 0.05))
    probe = LaplaceProbe(tau=4.0)  # decay length ~ h = 0.25
    with pytest.raises(ValueError, match="shallow"):
        elliptic_dn_solve(shallow, (1.0, 0.0), probe, np.array([0, 0, 1.0]))


def test_parameter_errors_linear_in_h_from_elliptic_probes():
    # single-h DN matrices of a graded medium carry an O(h) symbol bias;
    # the recovered parameters must inherit it (halving ratios near 2)
    from elastodn import probes_from_symbols, recover_lambda, recover_mu_rho
    prof = StratifiedProfile.from_polynomials([2.0], [1.0, 0.5], [1.0], span=(0.0, 3.0))
    truth = prof.jet(0.0)
    errs = []
    for h in (0.02, 0.01, 0.005):
        probe = LaplaceProbe(tau=1.0 / h)
        base = dn_matrix(prof, (1.0, 0.0), probe)
        scaled = dn_matrix(prof, (np.sqrt(2.0), 0.0), probe)
        pset = probes_from_symbols(base, scaled)
        mu, rho = recover_mu_rho(pset)
        lam = recover_lambda(pset, mu, rho)
        errs.append(abs(mu - truth.mu) + abs(rho - truth.rho)
                    + abs(lam - truth.lam))
    assert errs[0] > errs[1] > errs[2]
    assert 1.5 <= errs[0] / errs[1] <= 3.0
    assert 1.5 <= errs[1] / errs[2] <= 3.0


def test_normal_derivative_chain_from_extracted_symbols():
    # depth derivatives of the probe entries are not directly observable;
    # they come from the extracted subprincipal symbol through the forward
    # subprincipal map: d_s lambda0 = i * apply(lambda_{-1})
    from elastodn import (probes_from_symbols, recover_first_derivatives,
                          recover_jet, subprincipal_apply)
    prof = StratifiedProfile.from_polynomials([2.0], [1.0, 0.5], [1.0], span=(0.0, 3.0))
    probes = [LaplaceProbe(tau=1.0 / h) for h in (0.04, 0.02, 0.01)]
    syms = {}
    stacks = {}
    for key, xi in (("base", 1.0), ("scaled", np.sqrt(2.0))):
        sym = extract_dn_symbol(prof, (xi, 0.0), probes)
        jet = prof.jet(0.0)
        point = CotangentPoint(eta_prime=(xi, 0.0))
        triple = assemble_triple(MediumJet(jet.lam, jet.mu, jet.rho), FLAT, point)
        fact = closed_form_factorization(
            closed_form_factors(MediumJet(jet.lam, jet.mu, jet.rho), (xi, 0.0)),
            triple.nn, FLAT)
        ds_lam0 = 1j * subprincipal_apply(triple, fact, sym.lower_terms[0])
        syms[key] = sym.lambda0
        stacks[key] = [ds_lam0]
    pset = probes_from_symbols(syms["base"], syms["scaled"], c0=1.0,
                               derivative_stacks=(stacks["base"], stacks["scaled"]))
    jet0 = recover_jet(pset, max_order=0)
    dl, dm, dr = recover_first_derivatives(pset, jet0)
    assert abs(dm - 0.5) <= 0.03
    assert abs(dr) <= 0.03
    assert abs(dl) <= 0.06
