import math

import numpy as np
import pytest

from fraclab import fraclap
from fraclab.errors import HypothesisError, OrderError, ParameterError
from fraclab.fraclap import (
    DEFAULT_RULE,
    Field,
    SingularQuadRule,
    SpaceGrid,
    apply_singular_integral,
    apply_spectral,
    lemma_kk_check,
    normalization_constant,
)
from fraclab.testfn import bump_profile


def test_grid_validation():
    with pytest.raises(ParameterError):
        SpaceGrid(3, 1.0, 64)
    with pytest.raises(ParameterError):
        SpaceGrid(1, 0.0, 64)
    with pytest.raises(ParameterError):
        SpaceGrid(1, 1.0, 6)
    with pytest.raises(ParameterError):
        SpaceGrid(1, 1.0, 100)


def test_grid_geometry():
    g = SpaceGrid(1, 4.0, 16)
    assert g.spacing == 0.5
    assert g.cell_volume == 0.5
    a = g.axis()
    assert a[0] == -4.0 and np.isclose(a[-1], 3.5)
    g2 = SpaceGrid(2, 4.0, 16)
    assert g2.cell_volume == 0.25
    r = g2.radius()
    assert r.shape == (16, 16)
    assert np.isclose(r[0, 0], 4.0 * math.sqrt(2.0))


def test_field_validation():
    g = SpaceGrid(1, 1.0, 8)
    with pytest.raises(ParameterError):
        Field(g, np.zeros(9))
    with pytest.raises(ParameterError):
        Field(g, np.full(8, np.nan))
    f = Field(g, np.full(8, np.inf), diverged=True)
    assert f.diverged
    with pytest.raises(ParameterError):
        apply_spectral(f, 0.5)


def test_field_integral_and_sup():
    g = SpaceGrid(1, 3.0, 32)
    f = Field(g, np.ones(32))
    assert np.isclose(f.integral(), 6.0)
    f2 = Field(g, -2.0 * np.ones(32))
    assert f2.sup_norm() == 2.0


def test_spectral_eigenfunction():
    # cos(kx) is an exact eigenfunction with eigenvalue |k|^{2s}
    g = SpaceGrid(1, math.pi, 64)
    x = g.axis()
    f = Field(g, np.cos(3.0 * x))
    for s in (0.4, 0.8, 1.0):
        out = apply_spectral(f, s)
        assert np.allclose(out.values, 9.0**s * f.values, atol=1e-12)


def test_spectral_order_one_is_classical():
    g = SpaceGrid(1, math.pi, 64)
    x = g.axis()
    f = Field(g, np.cos(2.0 * x) + 0.5 * np.sin(5.0 * x))
    out = apply_spectral(f, 1.0)
    exact = 4.0 * np.cos(2.0 * x) + 12.5 * np.sin(5.0 * x)
    assert np.allclose(out.values, exact, atol=1e-11)


def test_spectral_zero_mean_and_nonnegative_form(rng):
    g = SpaceGrid(1, 4.0, 128)
    x = g.axis()
    vals = np.zeros(128)
    for k in range(1, 6):
        vals += rng.normal() * np.cos(k * math.pi * x / 4.0)
        vals += rng.normal() * np.sin(k * math.pi * x / 4.0)
    f = Field(g, vals + rng.normal())
    out = apply_spectral(f, 0.6)
    assert abs(np.mean(out.values)) < 1e-12 * f.sup_norm()
    # quadratic form <f, (-Delta)^s f> is nonnegative
    assert np.sum(f.values * out.values) * g.cell_volume > -1e-10


def test_spectral_order_bounds():
    g = SpaceGrid(1, 1.0, 8)
    f = Field(g, np.ones(8))
    for bad in (0.0, 1.2, -0.5):
        with pytest.raises(OrderError):
            apply_spectral(f, bad)


def test_spectral_2d_eigenfunction():
    g = SpaceGrid(2, math.pi, 16)
    a = g.axis()
    vals = np.cos(2.0 * a)[:, None] * np.cos(3.0 * a)[None, :]
    out = apply_spectral(Field(g, vals), 0.5)
    assert np.allclose(out.values, math.sqrt(13.0) * vals, atol=1e-12)


def test_normalization_constant():
    assert np.isclose(normalization_constant(1, 0.5), 1.0 / math.pi, atol=1e-15)
    with pytest.raises(ParameterError):
        normalization_constant(0, 0.5)
    with pytest.raises(OrderError):
        normalization_constant(1, 1.0)


def test_singular_rule_validation():
    with pytest.raises(ParameterError):
        SingularQuadRule(r_in=0.0)
    with pytest.raises(ParameterError):
        SingularQuadRule(r_in=2.0, r_cut=1.0)
    with pytest.raises(ParameterError):
        SingularQuadRule(gl_order=1)
    r = DEFAULT_RULE.refined()
    assert r.gl_order == 2 * DEFAULT_RULE.gl_order
    assert r.r_cut == DEFAULT_RULE.r_cut


def test_singular_cosine_eigenvalue():
    # (-Delta)^s cos = cos for every s: the symbol at |xi| = 1 is 1
    for s in (0.3, 0.5, 0.7):
        for x in (0.0, 1.1):
            val = apply_singular_integral(np.cos, x, s)
            assert np.isclose(val, math.cos(x), atol=5e-3)


def test_singular_order_bounds():
    with pytest.raises(OrderError):
        apply_singular_integral(np.cos, 0.0, 1.0)


def test_spectral_matches_singular_on_bump():
    g = SpaceGrid(1, 8.0, 256)
    f = Field(g, bump_profile(g.axis()))
    out = apply_spectral(f, 0.5)
    x = g.axis()
    ref = np.array([apply_singular_integral(bump_profile, r, 0.5) for r in (0.0, 0.5, 1.0, 1.5)])
    got = np.array([out.values[np.argmin(np.abs(x - r))] for r in (0.0, 0.5, 1.0, 1.5)])
    assert np.max(np.abs(got - ref)) / np.max(np.abs(ref)) < 0.02


def test_lemma_kk_report_shape():
    rep = lemma_kk_check(bump_profile, 0.5, 2.0)
    assert rep.c1_estimate > 0.0 and np.isfinite(rep.c1_estimate)
    assert rep.c2_estimate > 0.0 and np.isfinite(rep.c2_estimate)
    assert rep.probe_radii == fraclap.DEFAULT_PROBES
    assert rep.bulk_radius == 1.75


def test_lemma_kk_refinement_stable():
    a = lemma_kk_check(bump_profile, 0.5, 2.0)
    b = lemma_kk_check(bump_profile, 0.5, 2.0, rule=DEFAULT_RULE.refined())
    assert abs(a.c1_estimate - b.c1_estimate) <= 0.10 * b.c1_estimate
    assert abs(a.c2_estimate - b.c2_estimate) <= 0.10 * b.c2_estimate


def test_lemma_kk_hypothesis_rejections():
    with pytest.raises(ParameterError):
        lemma_kk_check(bump_profile, 0.5, 1.0)
    with pytest.raises(HypothesisError):
        # vanishes at the origin
        lemma_kk_check(lambda r: bump_profile(r - 3.0), 0.5, 2.0)
    with pytest.raises(HypothesisError):
        # negative dip
        lemma_kk_check(lambda r: bump_profile(r) - 0.5 * bump_profile(r - 1.0), 0.5, 2.0)
    with pytest.raises(HypothesisError):
        # positive tail everywhere
        lemma_kk_check(lambda r: np.exp(-np.asarray(r) ** 2), 0.5, 2.0)
    with pytest.raises(HypothesisError):
        # secondary hump: increasing on [1, 4]
        lemma_kk_check(lambda r: bump_profile(r) + bump_profile(r - 4.0), 0.5, 2.0)


def test_lemma_kk_bulk_probe_outside_support():
    with pytest.raises(HypothesisError):
        lemma_kk_check(bump_profile, 0.5, 2.0, bulk_radius=3.0)
