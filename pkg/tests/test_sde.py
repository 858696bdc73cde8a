import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtospec.errors import ConfigError, NumericalError
from gtospec.operators import build_gto_block, build_seo_block, shifted_flow
from gtospec.sde import (
    BinnedDensity,
    EnsembleSpec,
    SdeScheme,
    analytic_stationary_1d,
    bin_edges,
    compare_to_gto,
    kernel_bin_masses,
    l1_distance,
    run_ensemble,
    sample_noise,
    stationary_kernel,
    step,
)
from gtospec.systems import builtin, system_from_expressions

TWO_PI = 2 * np.pi


def _uniform(bins):
    return BinnedDensity([bin_edges(bins)], np.full(bins, 1 / bins))


# --------------------------------------------------------------------------
# noise and single steps


def test_noise_moments():
    xi = sample_noise(np.random.default_rng(1), 0.01, 1_000_000)
    assert abs(xi.mean()) < 5 * np.sqrt(100 / xi.size)
    assert xi.var() == pytest.approx(100.0, rel=0.02)


def test_noise_is_reproducible():
    a = sample_noise(np.random.default_rng(5), 0.1, 10)
    b = sample_noise(np.random.default_rng(5), 0.1, 10)
    assert np.array_equal(a, b)
    with pytest.raises(ConfigError):
        sample_noise(np.random.default_rng(5), 0.0, 10)


def test_step_pure_noise():
    s = builtin("diffusion", D=1, theta=0.5)
    out = step(s, SdeScheme(0.0, 0.01), [1.0], [2.0])
    assert out[0] == pytest.approx(1.0 + 0.01 * 2.0)


def test_step_constant_drift_wraps():
    s = system_from_expressions("const", 1, 2, 0.5, ["3"])
    out = step(s, SdeScheme(1.0, 0.5), [6.0], [0.0])
    assert out[0] == pytest.approx(7.5 - TWO_PI)
    assert 0 <= out[0] < TWO_PI


def test_step_batches_match_single_points():
    s = builtin("mult1d")
    sch = SdeScheme(0.5, 1e-2)
    x = np.array([[0.1], [2.0], [5.5]])
    xi = np.array([[0.3], [-1.0], [2.2]])
    batch = step(s, sch, x, xi)
    for i in range(3):
        assert np.allclose(step(s, sch, x[i], xi[i]), batch[i], atol=1e-14)


def test_implicit_step_is_self_consistent():
    s = builtin("mult1d")
    sch = SdeScheme(0.5, 1e-2)
    x0, xi = np.array([1.3]), np.array([1.7])
    x1 = step(s, sch, x0, xi)
    y = 0.5 * (x0 + np.unwrap([x0[0], x1[0]])[1:])
    F = -np.sin(y)
    G = 1 + 0.5 * np.cos(y)
    expected = x0 + sch.dt * (F + np.sqrt(2 * s.theta) * G * xi)
    assert np.mod(expected, TWO_PI) == pytest.approx(x1, abs=1e-12)


def test_explicit_and_midpoint_steps_differ_for_multiplicative_noise():
    s = builtin("mult1d")
    a = step(s, SdeScheme(0.0, 1e-2), [1.0], [3.0])
    b = step(s, SdeScheme(0.5, 1e-2), [1.0], [3.0])
    assert abs(a[0] - b[0]) > 1e-4


def test_implicit_step_reports_non_convergence():
    s = builtin("mult1d")
    with pytest.raises(NumericalError, match="reduce dt"):
        step(s, SdeScheme(1.0, 1.0, max_iter=2), [1.0], [50.0])


@pytest.mark.parametrize("kw", [{"alpha": -0.1, "dt": 0.1}, {"alpha": 0.5, "dt": 0.0}, {"alpha": 0.5, "dt": 0.1, "max_iter": 0}])
def test_scheme_validation(kw):
    with pytest.raises(ConfigError):
        SdeScheme(**kw)


@pytest.mark.parametrize(
    "kw",
    [dict(trajectories=0), dict(burn_in=10), dict(burn_in=-1), dict(bins=4), dict(seed=-3), dict(thin=0)],
)
def test_ensemble_validation(kw):
    base = dict(trajectories=4, steps=10, burn_in=0, seed=0)
    with pytest.raises(ConfigError):
        EnsembleSpec(**{**base, **kw})


def test_ensemble_sample_count():
    e = EnsembleSpec(trajectories=10, steps=1000, burn_in=100, seed=0, thin=50)
    assert e.samples_per_trajectory == 18 and e.samples == 180


# --------------------------------------------------------------------------
# ensembles


def test_uniform_density_under_pure_diffusion():
    s = builtin("diffusion", D=1, theta=1.0)
    ens = EnsembleSpec(trajectories=512, steps=400, burn_in=200, seed=3, bins=16, thin=20)
    emp = run_ensemble(s, SdeScheme(0.5, 1e-2), ens)
    assert emp.samples == 512 * 10
    se = np.sqrt((1 / 16) * (15 / 16) / emp.samples)
    assert np.abs(emp.masses - 1 / 16).max() <= 5 * se
    assert emp.masses.sum() == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("name", ["mult1d", "grad2d"])
def test_thread_count_does_not_change_histogram(name):
    s = builtin(name)
    ens = EnsembleSpec(trajectories=40, steps=200, burn_in=50, seed=9, bins=16, batch=8)
    a = run_ensemble(s, SdeScheme(0.5, 1e-2), ens, threads=1)
    b = run_ensemble(s, SdeScheme(0.5, 1e-2), ens, threads=3)
    assert np.array_equal(a.counts, b.counts)
    assert a.to_csv() == b.to_csv()


def test_batch_layout_does_not_change_histogram():
    s = builtin("mult1d")
    base = dict(trajectories=24, steps=150, burn_in=10, seed=2, bins=16)
    a = run_ensemble(s, SdeScheme(0.0, 1e-2), EnsembleSpec(**base, batch=24))
    b = run_ensemble(s, SdeScheme(0.0, 1e-2), EnsembleSpec(**base, batch=5))
    assert np.array_equal(a.counts, b.counts)


def test_seed_changes_histogram():
    s = builtin("mult1d")
    base = dict(trajectories=16, steps=100, burn_in=10, bins=16)
    a = run_ensemble(s, SdeScheme(0.0, 1e-2), EnsembleSpec(**base, seed=0))
    b = run_ensemble(s, SdeScheme(0.0, 1e-2), EnsembleSpec(**base, seed=1))
    assert not np.array_equal(a.counts, b.counts)


def test_histogram_csv_layout():
    s = builtin("grad2d")
    emp = run_ensemble(s, SdeScheme(0.0, 1e-2), EnsembleSpec(4, 20, 0, 0, bins=8))
    rows = emp.to_csv().splitlines()
    assert rows[0] == "bin_center_1,bin_center_2,mass"
    assert len(rows) == 1 + 64
    assert sum(float(r.split(",")[-1]) for r in rows[1:]) == pytest.approx(1.0)


# --------------------------------------------------------------------------
# closed-form densities


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 1.0))
def test_additive_noise_density_does_not_depend_on_alpha(alpha):
    s = builtin("grad1d")
    x = np.linspace(0, TWO_PI, 50)
    np.testing.assert_allclose(analytic_stationary_1d(s, alpha)(x), analytic_stationary_1d(s, 0.5)(x), rtol=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 0.25, 1.0])
def test_density_ratio_is_power_of_noise(alpha):
    s = builtin("mult1d")
    x = np.linspace(0, TWO_PI, 33)
    G = 1 + 0.5 * np.cos(x)
    ratio = analytic_stationary_1d(s, alpha)(x) / analytic_stationary_1d(s, 0.5)(x)
    ratio_expected = G ** (2 * alpha - 1)
    np.testing.assert_allclose(ratio / ratio[0], ratio_expected / ratio_expected[0], rtol=1e-10)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_density_normalisation(alpha):
    dens = analytic_stationary_1d(builtin("mult1d"), alpha)
    x, v = dens.grid(8192)
    assert v.mean() * TWO_PI == pytest.approx(1.0, abs=1e-10)
    assert dens.bin_masses(64).masses.sum() == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
def test_alpha_density_equals_midpoint_density_of_shifted_drift(alpha):
    s = builtin("mult1d")
    shifted = s.with_flow(shifted_flow(s, alpha))
    x = np.linspace(0, TWO_PI, 41)
    np.testing.assert_allclose(analytic_stationary_1d(s, alpha)(x), analytic_stationary_1d(shifted, 0.5)(x), rtol=1e-9)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_seo_kernel_matches_closed_form(alpha):
    s = builtin("mult1d", M=24)
    kern = kernel_bin_masses(stationary_kernel(build_seo_block(s, 1, alpha)), 32)
    ana = analytic_stationary_1d(s, alpha).bin_masses(32)
    assert l1_distance(kern, ana) <= 1e-8


def test_closed_form_preconditions():
    with pytest.raises(ConfigError):
        analytic_stationary_1d(builtin("grad2d"), 0.5)
    winding = system_from_expressions("wind", 1, 4, 0.5, ["1 + 0.5*cos(1*x1)"])
    with pytest.raises(ConfigError, match="winding"):
        analytic_stationary_1d(winding, 0.5)
    vanishing = system_from_expressions("zero", 1, 4, 0.5, ["-sin(1*x1)"], [["cos(1*x1)"]])
    with pytest.raises(ConfigError, match="positive"):
        analytic_stationary_1d(vanishing, 0.5)


def test_kernel_bin_masses_of_uniform_density():
    s = builtin("diffusion", D=1)
    masses = kernel_bin_masses(stationary_kernel(build_gto_block(s, 1)), 16)
    assert l1_distance(masses, _uniform(16)) <= 1e-14


# --------------------------------------------------------------------------
# L1 distance


def test_l1_examples():
    u = _uniform(8)
    assert l1_distance(u, u) == 0.0
    spike = BinnedDensity([bin_edges(8)], np.eye(8)[0])
    other = BinnedDensity([bin_edges(8)], np.eye(8)[1])
    assert l1_distance(spike, other) == 2.0
    assert 0 < l1_distance(u, spike) < 2
    with pytest.raises(ConfigError):
        l1_distance(u, _uniform(16))


# --------------------------------------------------------------------------
# interpretation comparison (small ensemble; the full study lives in the acceptance suite)


@pytest.fixture(scope="module")
def small_ensemble():
    # burn-in of seven time units; one sample per 0.3 time units
    return EnsembleSpec(trajectories=1024, steps=2000, burn_in=1400, seed=21, bins=8, thin=60)


@pytest.mark.parametrize("alpha", [0.0, 1.0])
def test_endpoint_schemes_follow_shifted_operator(small_ensemble, alpha):
    s = builtin("mult1d")
    cmp = compare_to_gto(s, SdeScheme(alpha, 5e-3), small_ensemble)
    assert cmp.l1_seo < 0.04
    assert cmp.l1_analytic < 0.04
    assert cmp.l1_gto > cmp.l1_seo + 0.04


def test_additive_noise_comparison_agrees_for_all_alpha():
    s = builtin("grad1d")
    ens = EnsembleSpec(trajectories=1024, steps=1500, burn_in=900, seed=4, bins=8, thin=60)
    cmp = compare_to_gto(s, SdeScheme(0.0, 5e-3), ens)
    assert cmp.l1_seo == pytest.approx(cmp.l1_gto, abs=1e-12)
    assert cmp.l1_gto < 0.06
    doc = cmp.to_json()
    assert doc["convention"] == "standard" and len(doc["masses"]) == 8


def test_comparison_preconditions(small_ensemble):
    with pytest.raises(ConfigError):
        compare_to_gto(builtin("grad2d"), SdeScheme(0.0, 1e-2), small_ensemble)
    with pytest.raises(ConfigError):
        compare_to_gto(builtin("mult1d"), SdeScheme(0.0, 1e-2), small_ensemble, convention="upside-down")
