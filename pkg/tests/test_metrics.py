import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from favprop.channels import (FIXED, IID, PATH_SHIFTED, SHARED_AOA, SHARED_COMPONENT,
                              ChannelEnsemble, UserFactor, counterexample_ensemble, sample_batch)
from favprop.errors import ArgumentError, HypothesisViolation
from favprop.geometry import ULA, ArrayGeometry
from favprop.metrics import (Estimate, bound_rhs_21, cosine_similarity, cross_term_table,
                             decompose_mean_z, estimate_mean_z, fp_report, inner_product_z,
                             steering_cross_term)


def ula(M, spacing=0.5):
    return ArrayGeometry(ULA, M, spacing)


def fixed(aoas, M=16, **kw):
    return ChannelEnsemble(ula(M, kw.pop("spacing", 0.5)), L=len(aoas), aoa_model="fixed",
                           aoas=tuple(aoas), **kw)


def test_inner_product_all_ones():
    assert inner_product_z(np.ones((7, 2)), 0, 1) == 1


def test_inner_product_orthogonal():
    assert inner_product_z(np.array([[1, 1], [1, -1]]), 0, 1) == 0


def test_inner_product_counterexample_L2():
    a = np.array([1, -1])
    G = np.tile(a, (3, 1)) @ np.stack([a, a], axis=1)
    assert inner_product_z(G, 0, 1) == 4


def test_inner_product_bad_index():
    with pytest.raises(ArgumentError):
        inner_product_z(np.ones((2, 2)), 0, 2)


def test_mean_counterexample_exact():
    est = estimate_mean_z(counterexample_ensemble(3, 5), 0, 1, 1000, 7)
    assert est.value == 9 and est.se_re == 0 and est.se_im == 0


def test_mean_deterministic_all_ones():
    ens = fixed([0.0], M=4, gain_model=FIXED, gains=((1, 1),))
    est = estimate_mean_z(ens, 0, 1, 100, 0)
    assert est.value == pytest.approx(1.0) and est.se == 0


def test_mean_requires_distinct_users():
    with pytest.raises(ArgumentError):
        estimate_mean_z(counterexample_ensemble(2, 2), 1, 1, 10, 0)


def test_mean_factorized_zero():
    ens = ChannelEnsemble(ula(64), L=2, gain_model="factorized", coupling=SHARED_AOA)
    est = estimate_mean_z(ens, 0, 1, 10_000, 4)
    assert est.within_zero(4.0)


def test_cross_term_diag_exact():
    assert steering_cross_term(fixed([0.1, 0.9]), 1, 1).value == 1.0


def test_cross_term_fixed_aoas():
    ens = fixed([0.0, math.pi / 6], M=100)
    assert abs(steering_cross_term(ens, 0, 1).value) < 1e-12
    ens = fixed([0.0, math.pi / 6], M=100, spacing=0.25)
    assert abs(steering_cross_term(ens, 0, 1).value) == pytest.approx(0.026131259297527,
                                                                       rel=1e-9)


def test_cross_term_identical():
    assert steering_cross_term(fixed([0.0, 0.0]), 0, 1).value == pytest.approx(1.0)


@pytest.mark.parametrize("M", [1, 4, 64, 4096])
def test_diag_identity_random_aoas(M):
    ens = ChannelEnsemble(ula(M), L=3)
    table = cross_term_table(ens, 32, 1)
    for r in range(3):
        assert abs(table[r][r].value - 1) < 1e-9


def test_decomposition_iid_diag_zero():
    ens = fixed([0.0, 0.3], gain_model=IID)
    d = decompose_mean_z(ens, 0, 1, 10_000, 9)
    assert d.diag_part.within_zero(4.0)
    assert d.consistency_error <= 1e-12 * max(1.0, abs(d.mean_z.value))


def test_decomposition_shared_component():
    # E{conj(alpha_r0) alpha_r1} = shared_power = c per path -> diag ~ L*c at any M
    for M in (4, 256):
        ens = fixed([0.0, 0.3, -0.5], M=M, gain_model=SHARED_COMPONENT, shared_power=0.5)
        d = decompose_mean_z(ens, 0, 1, 20_000, M)
        assert abs(d.diag_part.value - 1.5) <= 4 * d.diag_part.mc_error


def test_decomposition_single_path():
    d = decompose_mean_z(fixed([0.2], gain_model=IID), 0, 1, 500, 1)
    assert d.offdiag_part.value == 0 and d.offdiag_factored == 0


def test_decomposition_refuses_coupled():
    with pytest.raises(HypothesisViolation) as info:
        decompose_mean_z(counterexample_ensemble(3, 4), 0, 1, 100, 0)
    assert info.value.ensemble == "counterexample"


def test_bound_counterexample():
    rhs = bound_rhs_21(counterexample_ensemble(3, 4), 1.0, 4000, 2)
    assert rhs.imag == 0
    assert abs(rhs.value - 3) <= 4 * rhs.mc_error


def test_bound_single_path():
    ens = ChannelEnsemble(ula(32), L=1, gain_model="rademacher")
    rhs = bound_rhs_21(ens, 2.0, 100, 0)
    assert rhs.value == pytest.approx(4.0) and rhs.se == pytest.approx(0.0, abs=1e-12)


def test_bound_is_real_for_random_aoas():
    ens = ChannelEnsemble(ula(16), L=3, gain_model="rademacher")
    assert bound_rhs_21(ens, 1.0, 2000, 3).imag == 0.0


def test_bound_rejects_violating_c_alpha():
    ens = ChannelEnsemble(ula(4), L=2, gain_model="rademacher")
    with pytest.raises(HypothesisViolation):
        bound_rhs_21(ens, 0.5, 100, 0)


def test_bound_unbounded_needs_c_alpha():
    with pytest.raises(ArgumentError):
        bound_rhs_21(ChannelEnsemble(ula(4), L=2), None, 100, 0)


@pytest.mark.parametrize("L", [2, 3, 5, 8])
def test_counterexample_margin(L):
    ens = counterexample_ensemble(L, 3)
    z = estimate_mean_z(ens, 0, 1, 5000, L)
    rhs = bound_rhs_21(ens, 1.0, 5000, L)
    assert z.value == L ** 2
    assert z.value.real - rhs.value.real > 4 * rhs.mc_error
    assert abs(rhs.value - L) <= 4 * rhs.mc_error


def test_cosine_examples():
    assert cosine_similarity([1, 1, 1, 1], [1, 1, 1, 1]) == pytest.approx(1.0)
    assert cosine_similarity([1, 1], [1, -1]) == 0.0
    assert cosine_similarity([1, 0], [1, 1]) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_cosine_zero_vector():
    with pytest.raises(ArgumentError):
        cosine_similarity([0, 0], [1, 1])


@given(st.lists(st.sampled_from([-1.0, 1.0]), min_size=1, max_size=64),
       st.lists(st.sampled_from([-1.0, 1.0]), min_size=64, max_size=64))
def test_cosine_inverse_M_form(a, b):
    # vectors of norm sqrt(M): cosine equals (1/M) b^T a
    b = b[:len(a)]
    assert cosine_similarity(a, b) == pytest.approx(np.dot(b, a) / len(a), abs=1e-12)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=16))
def test_cosine_in_range(v):
    a = np.asarray(v)
    b = a[::-1].copy()
    if np.linalg.norm(a) < 1e-6:
        return
    c = cosine_similarity(a, b)
    assert -1.0 <= c <= 1.0


@given(seed=st.integers(0, 2 ** 32 - 1), L=st.integers(1, 4), M=st.integers(1, 64))
def test_conjugate_symmetry_and_gram(seed, L, M):
    ens = ChannelEnsemble(ula(M), L=L, K=3)
    r = np.random.default_rng(seed)
    G = sample_batch(ens, 4, r, r).G
    for g in G:
        assert inner_product_z(g, 0, 2) == pytest.approx(np.conj(inner_product_z(g, 2, 0)))
        gram = g.conj().T @ g / M
        assert np.all(np.abs(np.diag(gram).imag) < 1e-12) and np.all(np.diag(gram).real >= 0)


def test_scale_covariance_deterministic():
    base = fixed([0.0, 0.4], M=8, gain_model=FIXED, gains=((1, 2j), (0.5, -1)))
    scaled = fixed([0.0, 0.4], M=8, gain_model=FIXED, gains=((1, 2j), (0.5, -1)),
                   gain_scale=2.0)
    z1 = estimate_mean_z(base, 0, 1, 10, 0).value
    z2 = estimate_mean_z(scaled, 0, 1, 10, 0).value
    assert z2 == pytest.approx(4 * z1, rel=1e-12)


def test_scale_covariance_random():
    kw = dict(gain_model=PATH_SHIFTED)
    z1 = estimate_mean_z(fixed([0.0, 0.3], **kw), 0, 1, 10_000, 5)
    z2 = estimate_mean_z(fixed([0.0, 0.3], gain_scale=2.0, **kw), 0, 1, 10_000, 5)
    # same seed and streams: the draws are identical up to the factor
    assert z2.value == pytest.approx(4 * z1.value, rel=1e-12)
    z3 = estimate_mean_z(fixed([0.0, 0.3], gain_scale=2.0, **kw), 0, 1, 10_000, 6)
    assert abs(z3.value - 4 * z1.value) <= 4 * (z3.mc_error + 4 * z1.mc_error)


def test_estimate_within_zero():
    assert Estimate(0.3 + 0j, 0.1, 0.05, 10).within_zero(4.0)
    assert not Estimate(0.5 + 0j, 0.1, 0.05, 10).within_zero(4.0)


def test_fp_report_counterexample():
    rep = fp_report(counterexample_ensemble(3, 4), 0, 1, 2000, 1)
    d = rep.to_dict()
    assert d["mean_z"]["re"] == 9 and rep.decomposition is None
    assert rep.bound_violated
    assert any("coupled" in n for n in rep.notes)


def test_fp_report_uncoupled():
    rep = fp_report(fixed([0.0, 0.3], gain_model=IID), 0, 1, 1000, 2)
    assert rep.bound_rhs is None and rep.decomposition is not None
    assert rep.decomposition.consistency_error < 1e-12
