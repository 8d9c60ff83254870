import math

import numpy as np
import pytest

from relgas.errors import DomainError, InsufficientSamples
from relgas.tools.conservation_laws import builtin_laws, dilation_exponent
from relgas.tools.core import Jet2, el_residual
from relgas.tools.entropy import EntropyProfile
from relgas.tools.symmetry import (
    AffineGenerator,
    classify_entropy,
    delta_invariant,
    determining_residuals,
    dilate_jet,
    entropy_amplitude,
    entropy_scaling,
    expected_variational,
    extension_for,
    kernel_generators,
    noether_density,
    prolong1,
    relative_noether_residual,
    sample_jets,
    scaled_delta,
    translate_jet,
    x1,
    x2,
    x3,
    x4,
    x4a,
    x4b,
    x5,
)

GAMMAS = (1.4, 5.0 / 3.0, 2.0)


def _jets(profile, count=2000, seed=0):
    return sample_jets(np.random.default_rng(seed), count, profile)


def test_generator_needs_a_coefficient():
    with pytest.raises(DomainError):
        AffineGenerator("zero")
    assert x3().scaled(2.0).c1 == 2.0


def test_prolongation_of_dilation():
    jets = _jets(EntropyProfile.constant(1.0), count=10)
    eta_t, eta_xi = prolong1(x4(), jets)
    np.testing.assert_array_equal(eta_t, 0.0)
    np.testing.assert_array_equal(eta_xi, 0.0)


def test_kernel_is_variational_for_every_profile():
    profiles = [
        EntropyProfile.constant(1.0),
        EntropyProfile.exponential(1.3),
        EntropyProfile.power(-0.7),
        EntropyProfile.from_expression("1 + xi**2"),
    ]
    for gamma in GAMMAS:
        for prof in profiles:
            jets = _jets(prof)
            for gen in kernel_generators():
                assert np.max(relative_noether_residual(gen, jets, prof, gamma)) <= 1e-10


def test_extension_verdicts():
    for gamma in GAMMAS:
        const = EntropyProfile.constant(1.0)
        jets = _jets(const)
        assert np.max(relative_noether_residual(x5(), jets, const, gamma)) <= 1e-10
        np.testing.assert_allclose(relative_noether_residual(x4(), jets, const, gamma), 2.0, rtol=1e-12)

        expo = EntropyProfile.exponential(1.5)
        np.testing.assert_allclose(
            relative_noether_residual(x4a(1.5, gamma), _jets(expo), expo, gamma), 1.5, rtol=1e-10)

        q = dilation_exponent(gamma)
        matched = EntropyProfile.power(q)
        assert np.max(relative_noether_residual(x4b(q, gamma), _jets(matched), matched, gamma)) <= 1e-10
        off = EntropyProfile.power(q + 0.5)
        rel = relative_noether_residual(x4b(q + 0.5, gamma), _jets(off), off, gamma)
        np.testing.assert_allclose(rel, 0.5, rtol=1e-9)


def test_expected_variational():
    gamma = 1.4
    assert expected_variational(x1(), EntropyProfile.power(1.0), gamma)
    assert expected_variational(x5(), EntropyProfile.constant(1.0), gamma)
    assert not expected_variational(x4(), EntropyProfile.constant(1.0), gamma)
    assert not expected_variational(x4a(1.0, gamma), EntropyProfile.exponential(1.0), gamma)
    q = dilation_exponent(gamma)
    assert expected_variational(x4b(q, gamma), EntropyProfile.power(q), gamma)
    assert not expected_variational(x4b(q + 0.1, gamma), EntropyProfile.power(q + 0.1), gamma)


def test_noether_density_reproduces_builtin_laws():
    gamma = 1.5
    q = dilation_exponent(gamma)
    generators = {"X1": x1(), "X2": x2(), "X3": x3(), "X5": x5(), "X4b": x4b(q, gamma)}
    for prof in (EntropyProfile.constant(1.2), EntropyProfile.power(q)):
        jets = _jets(prof, count=300, seed=4)
        S0 = prof.value(jets.xi)
        for law in builtin_laws(prof, gamma):
            current = noether_density(generators[law.generator], gamma)
            Nt, Nx = current.evaluate(jets, S0, gamma)
            Tt, Tx = law.evaluate(jets, S0, gamma)
            scale = np.max(np.abs(Tt)) + np.max(np.abs(Tx))
            assert np.max(np.abs(Nt - law.noether_factor * Tt)) <= 1e-12 * scale
            assert np.max(np.abs(Nx - law.noether_factor * Tx)) <= 1e-12 * scale


def test_noether_density_warns_for_non_variational_generator():
    law = noether_density(x4(), 5.0 / 3.0, profile=EntropyProfile.constant(1.0))
    assert law.warning is not None and "X4" in law.warning
    assert noether_density(x2(), 5.0 / 3.0, profile=EntropyProfile.constant(1.0)).warning is None


def test_delta_invariant_values():
    assert delta_invariant(2.0, 2.0, 2.0, 0.0) == pytest.approx(8.0)
    xi = np.linspace(1.0, 2.0, 16)
    for prof in (EntropyProfile.exponential(1.7), EntropyProfile.power(-2.3)):
        assert np.max(scaled_delta(*prof.derivs(xi))) <= 1e-14


def test_delta_invariant_is_cubic_in_entropy_scale():
    prof = EntropyProfile.from_expression("1 + xi**2 + sin(xi)")
    derivs = [np.asarray(d) for d in prof.derivs(np.linspace(0.2, 1.8, 9))]
    base = np.asarray(delta_invariant(*derivs))
    for lam in (0.3, 2.0, 7.5):
        scaled = np.asarray(delta_invariant(*(lam * d for d in derivs)))
        np.testing.assert_allclose(scaled, lam ** 3 * base, rtol=1e-12, atol=1e-12 * lam ** 3)


def test_classify_canonical_profiles():
    xi = np.linspace(0.0, 1.0, 16)
    res = classify_entropy(EntropyProfile.constant(2.0), xi)
    assert res.family == "constant"
    assert [g.name for g in res.extension] == ["X4", "X5"]

    res = classify_entropy(EntropyProfile.from_expression("exp(2*xi)"), xi)
    assert res.family == "exponential"
    assert abs(res.q - 2.0) <= 1e-8

    res = classify_entropy(EntropyProfile.from_expression("1/xi"), np.linspace(1.0, 2.0, 16))
    assert res.family == "power"
    assert abs(res.q + 1.0) <= 1e-8

    res = classify_entropy(EntropyProfile.from_expression("1 + xi**2"), xi)
    assert res.family == "generic"
    assert res.extension == []
    assert res.max_scaled_delta > 1e-3


def test_classify_shifted_power():
    res = classify_entropy(EntropyProfile.from_expression("1/(xi + 1)"), np.linspace(0.0, 1.0, 16))
    assert res.family == "power"
    assert abs(res.q + 1.0) <= 1e-8
    assert abs(res.offset + 1.0) <= 1e-8
    assert res.extension[0].a0 == pytest.approx(-(5.0 / 3.0 - 1.0) * res.offset)


def test_classify_needs_samples():
    with pytest.raises(InsufficientSamples):
        classify_entropy(EntropyProfile.constant(1.0), np.linspace(0.0, 1.0, 5))


def test_extension_for_custom_profile_goes_through_classification():
    gens = extension_for(EntropyProfile.from_expression("exp(-xi)"), 1.4)
    assert [g.name for g in gens] == ["X4a"]
    assert gens[0].b1 == pytest.approx(-1.0)


def test_determining_relations_admit_tabulated_generators():
    xi = np.linspace(1.0, 2.0, 16)
    gamma = 5.0 / 3.0
    cases = [
        (EntropyProfile.constant(1.0), [x4(), x5()]),
        (EntropyProfile.exponential(0.8), [x4a(0.8, gamma)]),
        (EntropyProfile.power(-0.4), [x4b(-0.4, gamma)]),
    ]
    for prof, extension in cases:
        for gen in kernel_generators() + extension:
            assert determining_residuals(gen, prof, gamma, xi)["admitted"], gen.name
    assert not determining_residuals(x5(), EntropyProfile.exponential(0.8), gamma, xi)["admitted"]


def test_dilation_rescales_residual():
    prof = EntropyProfile.exponential(0.9)
    gamma = 1.4
    jets = _jets(prof, count=50, seed=7)
    rng = np.random.default_rng(8)
    jet2 = Jet2(xi=jets.xi, t=jets.t, phi=jets.phi, phi_t=jets.phi_t, phi_xi=jets.phi_xi,
                phi_tt=rng.normal(size=50), phi_txi=rng.normal(size=50), phi_xixi=rng.normal(size=50))
    a = 0.35
    moved = dilate_jet(jet2, a)
    moved_prof = prof.rescaled(stretch=math.exp(a))
    S, S1, _, _ = prof.derivs(jet2.xi)
    Sm, Sm1, _, _ = moved_prof.derivs(moved.xi)
    np.testing.assert_allclose(Sm, S, rtol=1e-12)
    r0 = el_residual(jet2, S, S1, gamma)
    r1 = el_residual(moved, Sm, Sm1, gamma)
    np.testing.assert_allclose(r1, math.exp(-a) * r0, rtol=1e-10, atol=1e-12)


def test_translation_keeps_kernel_residual():
    prof = EntropyProfile.power(-0.5)
    jets = _jets(prof, count=100)
    moved = translate_jet(jets, 0.25)
    r = relative_noether_residual(x3(), moved, prof.translated(0.25), 1.4)
    assert np.max(r) <= 1e-10


def test_entropy_scaling_keeps_family():
    gamma = 5.0 / 3.0
    power = entropy_scaling(EntropyProfile.power(-0.6), 0.4, gamma)
    assert power.effective_q == -0.6
    expo = entropy_scaling(EntropyProfile.exponential(1.0), 0.4, gamma)
    assert expo.effective_q == pytest.approx(math.exp(-0.4 / (gamma - 1.0)))
    amp = entropy_amplitude(EntropyProfile.exponential(1.0), 0.4)
    assert amp.effective_q == 1.0
    assert amp.value(0.0) == pytest.approx(math.exp(0.4))
    xi = np.linspace(1.0, 2.0, 16)
    assert classify_entropy(power, xi * power.stretch).family == "power"
