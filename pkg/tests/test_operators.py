
import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_form, random_system
from gtospec.errors import ConfigError
from gtospec.expressions import trig_field
from gtospec.exterior import FormField, ModeLattice, TrigField, TrigVectorField, pair
from gtospec.operators import (
    NoiseModel,
    SystemSpec,
    all_gto_blocks,
    build_d_matrix,
    build_dbar_block,
    build_gto_block,
    build_seo_block,
    check_nondegenerate,
    d_sparse,
    dbar_sparse,
    gto_sparse,
    lie_matrix_columns,
    lie_sparse,
    matrix_free_apply,
    propagator,
    shifted_flow,
)
from gtospec.systems import builtin, builtin_names, system_from_expressions


def _frame_system(flow, dim=1, cutoff=4, theta=1.0):
    return system_from_expressions("t", dim, cutoff, theta, flow)


def _rel(a, b):
    a, b = sp.csr_matrix(a), sp.csr_matrix(b)
    diff = (a - b).tocsr()
    scale = max(np.abs(a.data).max(initial=0), np.abs(b.data).max(initial=0), 1.0)
    return np.abs(diff.data).max(initial=0) / scale


# --------------------------------------------------------------------------
# noise


def test_nondegeneracy_examples():
    lat = ModeLattice(2, 2)
    frame = NoiseModel(tuple(TrigVectorField.coordinate_frame(lat)), 1.0)
    assert check_nondegenerate(frame, lat, 16) == pytest.approx(1.0)
    l1 = ModeLattice(1, 2)
    cos = NoiseModel((TrigVectorField([trig_field("cos(1*x1)", l1)]),), 1.0)
    assert check_nondegenerate(cos, l1, 16) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ConfigError):
        check_nondegenerate(frame, lat, 3)


def test_noise_and_system_validation():
    lat = ModeLattice(1, 2)
    g = TrigVectorField.coordinate_frame(lat)
    with pytest.raises(ConfigError):
        NoiseModel(tuple(g), 0.0)
    with pytest.raises(ConfigError):
        NoiseModel((), 1.0)
    complex_flow = TrigVectorField([TrigField.from_modes(lat, {(1,): 1.0})])
    with pytest.raises(ConfigError, match="reality"):
        SystemSpec(lat, complex_flow, NoiseModel(tuple(g), 1.0))


def test_degenerate_noise_warns():
    lat = ModeLattice(1, 2)
    s = SystemSpec(lat, TrigVectorField.zeros(lat), NoiseModel((TrigVectorField([trig_field("cos(1*x1)", lat)]),), 1.0))
    with pytest.warns(UserWarning, match="degenerate"):
        build_gto_block(s, 0)


# --------------------------------------------------------------------------
# d


def test_d_matrix_1d_diagonal():
    lat = ModeLattice(1, 3)
    m = build_d_matrix(lat, 0).matrix
    np.testing.assert_array_equal(np.diag(m), 1j * np.arange(-3, 4))
    assert not np.any(m - np.diag(np.diag(m)))
    assert not np.any(m[:, lat.index_of((0,))])


@pytest.mark.parametrize("dim", [2, 3])
def test_consecutive_d_vanish(dim):
    lat = ModeLattice(dim, 2)
    for k in range(dim - 1):
        assert (d_sparse(lat, k + 1) @ d_sparse(lat, k)).count_nonzero() == 0


# --------------------------------------------------------------------------
# H and dbar


def test_pure_diffusion_block():
    H = build_gto_block(_frame_system(["0"]), 0).matrix
    lat = ModeLattice(1, 4)
    np.testing.assert_allclose(np.diag(H), np.arange(-4, 5) ** 2)
    assert H[lat.index_of((2,)), lat.index_of((2,))] == pytest.approx(4.0)
    assert not np.any(H - np.diag(np.diag(H)))


@pytest.mark.parametrize("c,theta", [(0.7, 1.0), (-1.5, 0.3)])
def test_advection_diffusion_block(c, theta):
    H = build_gto_block(_frame_system([f"{c}"], theta=theta), 0).matrix
    n = np.arange(-4, 5)
    np.testing.assert_allclose(np.diag(H), theta * n**2 + 1j * c * n)


def test_dbar_examples():
    s = _frame_system(["0"], theta=1e-9)
    assert np.abs(build_dbar_block(s, 1).matrix).max() <= 1e-9 * 16
    theta = 0.4
    s = _frame_system(["1"], theta=theta)
    n = np.arange(-4, 5)
    np.testing.assert_allclose(build_dbar_block(s, 1).matrix, np.diag(1 - theta * 1j * n))
    assert build_dbar_block(s, 0).matrix.shape == (0, 9)


SYSTEMS = [random_system(2, 4, seed=s) for s in range(3)] + [random_system(2, 3, seed=7, multiplicative=True),
                                                             random_system(1, 8, seed=3, multiplicative=True),
                                                             random_system(3, 2, seed=5)]


@pytest.mark.parametrize("system", SYSTEMS, ids=lambda s: f"{s.name}-M{s.lattice.cutoff}")
def test_supersymmetry_identities(system):
    lat, D = system.lattice, system.dim
    for k in range(D + 1):
        H = gto_sparse(system, k)
        rhs = sp.csr_matrix(H.shape, dtype=complex)
        if k >= 1:
            rhs = rhs + d_sparse(lat, k - 1) @ dbar_sparse(system, k)
        if k < D:
            rhs = rhs + dbar_sparse(system, k + 1) @ d_sparse(lat, k)
            assert _rel(d_sparse(lat, k) @ H, gto_sparse(system, k + 1) @ d_sparse(lat, k)) <= 1e-13
        assert _rel(H, rhs) <= 1e-13


@pytest.mark.parametrize("system", SYSTEMS[:4], ids=lambda s: s.name)
def test_real_forms_stay_real(system, rng):
    for k in range(system.dim + 1):
        psi = random_form(system.lattice, k, rng)
        assert matrix_free_apply(system, k, psi).is_real(1e-12)


@pytest.mark.parametrize("name", builtin_names())
def test_probability_conservation(name, rng):
    s = builtin(name)
    lat = s.lattice
    one = FormField.from_components(lat, 0, {(): TrigField.constant(lat, 1.0)})
    H = build_gto_block(s, s.dim)
    psi = random_form(lat, s.dim, rng, real=False)
    assert abs(pair(one, H.apply(psi))) <= 1e-11 * psi.norm() * max(np.abs(H.matrix).max(), 1)
    vol = FormField.volume(lat)
    assert abs(pair(one, H.apply(vol))) <= 1e-12


@pytest.mark.parametrize("system", SYSTEMS[:2], ids=lambda s: s.name)
def test_lie_assembly_matches_form_operations(system):
    for k in range(system.dim + 1):
        cols = np.arange(0, lie_sparse(system.flow, k).shape[1], 7)
        ref = lie_matrix_columns(system.flow, k, cols)
        np.testing.assert_allclose(lie_sparse(system.flow, k).toarray()[:, cols], ref, atol=1e-12)


@pytest.mark.parametrize("system", SYSTEMS, ids=lambda s: f"{s.name}-M{s.lattice.cutoff}")
def test_matrix_free_matches_assembly(system, rng):
    for k in range(system.dim + 1):
        psi = random_form(system.lattice, k, rng, real=False)
        ref = build_gto_block(system, k).apply(psi).vector
        got = matrix_free_apply(system, k, psi).vector
        assert np.linalg.norm(got - ref) <= 1e-12 * np.linalg.norm(ref)


def test_matrix_free_pure_diffusion():
    s = builtin("diffusion", D=2, theta=0.7)
    lat = s.lattice
    psi = random_form(lat, 1, np.random.default_rng(1), real=False)
    out = matrix_free_apply(s, 1, psi)
    np.testing.assert_allclose(out.coeffs, 0.7 * lat.norm_sq * psi.coeffs, atol=1e-12)


def test_block_degree_checks():
    s = builtin("grad1d")
    with pytest.raises(ConfigError):
        build_gto_block(s, 2)
    with pytest.raises(ConfigError):
        matrix_free_apply(s, 0, FormField.zeros(s.lattice, 1))
    with pytest.raises(ConfigError):
        build_gto_block(s, 0).apply(FormField.zeros(s.lattice, 1))


# --------------------------------------------------------------------------
# SEO and the drift shift


@pytest.mark.parametrize("name", ["mult1d", "grad2d", "grad1d"])
@pytest.mark.parametrize("convention", ["standard", "printed"])
def test_seo_at_half_is_gto(name, convention):
    s = builtin(name)
    for k in range(s.dim + 1):
        np.testing.assert_array_equal(build_seo_block(s, k, 0.5, convention).matrix, build_gto_block(s, k).matrix)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 1.0])
def test_additive_noise_has_no_shift(alpha):
    s = builtin("grad2d")
    for k in range(3):
        np.testing.assert_array_equal(build_seo_block(s, k, alpha).matrix, build_gto_block(s, k).matrix)


def test_shift_signs_for_multiplicative_noise():
    s = builtin("mult1d")
    corr = s.noise.drift_correction()[0].coeffs
    assert np.any(corr)
    f0, f1 = shifted_flow(s, 0.0)[0].coeffs, shifted_flow(s, 1.0)[0].coeffs
    base = s.flow[0].coeffs
    np.testing.assert_allclose(f0 - base, -(f1 - base))
    np.testing.assert_allclose(f1 - base, s.theta * corr)
    np.testing.assert_allclose(shifted_flow(s, 1.0, "printed")[0].coeffs - base, -s.theta * corr)
    with pytest.raises(ConfigError):
        shifted_flow(s, 0.2, "sideways")
    with pytest.raises(ConfigError):
        shifted_flow(s, 1.5)


# --------------------------------------------------------------------------
# propagator


def test_propagator_small_time_is_identity():
    b = build_gto_block(builtin("mult1d"), 1)
    P = propagator(b, 1e-12).matrix
    np.testing.assert_allclose(P, np.eye(P.shape[0]), atol=1e-9)
    with pytest.raises(ConfigError):
        propagator(b, 0.0)


def test_propagator_diffusion_entry():
    s = _frame_system(["0"], theta=1.0)
    P = propagator(build_gto_block(s, 0), 1.0).matrix
    i = s.lattice.index_of((1,))
    assert P[i, i] == pytest.approx(np.exp(-1.0), rel=1e-12)
    assert P[i, i] == pytest.approx(0.367879, abs=5e-7)


@settings(max_examples=8, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_propagator_semigroup(t1, t2):
    b = build_gto_block(builtin("grad2d", eps=0.2), 1)
    lhs = propagator(b, t1).matrix @ propagator(b, t2).matrix
    rhs = propagator(b, t1 + t2).matrix
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_propagator_from_eigendecomposition():
    b = build_gto_block(builtin("mult1d"), 0)
    vals, vecs = np.linalg.eig(b.matrix)
    a = propagator(b, 0.7).matrix
    c = propagator(b, 0.7, eig=(vals, vecs)).matrix
    assert np.linalg.norm(a - c) <= 1e-9 * np.linalg.norm(a)


def test_all_blocks_cover_every_degree():
    blocks = all_gto_blocks(builtin("abc3d", M=1))
    assert [b.degree for b in blocks] == [0, 1, 2, 3]
    assert [b.shape[0] for b in blocks] == [27, 81, 81, 27]
