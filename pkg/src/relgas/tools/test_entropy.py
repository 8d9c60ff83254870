import numpy as np
import pytest

from relgas.errors import ProfileError
from relgas.tools.entropy import EntropyProfile


def test_exponential_derivatives():
    prof = EntropyProfile.exponential(2.0)
    S, S1, S2, S3 = prof.derivs(0.0)
    assert (S, S1, S2, S3) == pytest.approx((1.0, 2.0, 4.0, 8.0))
    assert prof.effective_q == 2.0


def test_power_derivatives():
    prof = EntropyProfile.power(-1.0)
    assert prof.derivs(2.0) == pytest.approx((0.5, -0.25, 0.25, -0.375))


def test_constant_profile_and_dust():
    prof = EntropyProfile.constant(3.0)
    S, S1, S2, S3 = prof.derivs(np.linspace(0.0, 1.0, 5))
    np.testing.assert_array_equal(S, 3.0)
    np.testing.assert_array_equal(S1, 0.0)
    assert EntropyProfile.constant(0.0).value(0.5) == 0.0
    with pytest.raises(ProfileError):
        EntropyProfile.constant(-1.0)


def test_expression_profile_uses_symbolic_derivatives():
    prof = EntropyProfile.from_expression("1 + xi**2")
    assert prof.derivs(1.0) == pytest.approx((2.0, 2.0, 2.0, 0.0))
    const = EntropyProfile.from_expression("2")
    np.testing.assert_allclose(const.value(np.array([0.1, 0.7])), [2.0, 2.0])


def test_expression_profile_rejects_unknown_symbols():
    with pytest.raises(ProfileError):
        EntropyProfile.from_expression("1 + y").value(0.5)
    with pytest.raises(ProfileError):
        EntropyProfile.from_expression("1 +* xi").value(0.5)


def test_custom_evaluators():
    prof = EntropyProfile.custom([lambda x: np.exp(x), lambda x: np.exp(x),
                                  lambda x: np.exp(x), lambda x: np.exp(x)])
    assert prof.derivs(0.0) == pytest.approx((1.0, 1.0, 1.0, 1.0))


def test_check_domain():
    EntropyProfile.power(2.0).check_domain(1.0, 2.0)
    with pytest.raises(ProfileError):
        EntropyProfile.power(2.0).check_domain(0.0, 1.0)
    with pytest.raises(ProfileError):
        EntropyProfile.from_expression("xi - 0.5").check_domain(0.0, 1.0)


def test_validate_derivatives():
    xi = np.linspace(1.0, 2.0, 11)
    assert EntropyProfile.power(-1.5).validate_derivatives(xi) < 1e-6
    with pytest.raises(ProfileError, match="derivative 3"):
        EntropyProfile.custom([np.exp, np.exp, np.exp, lambda x: 0.0 * x])


def test_inconsistent_evaluators_are_rejected_on_construction():
    with pytest.raises(ProfileError, match="derivative 1"):
        EntropyProfile.custom([lambda x: np.exp(2.0 * x), lambda x: 3.0 * np.exp(2.0 * x),
                               lambda x: 4.0 * np.exp(2.0 * x), lambda x: 8.0 * np.exp(2.0 * x)],
                              domain=(0.0, 1.0))
    prof = EntropyProfile.custom([lambda x: np.exp(2.0 * x), lambda x: 2.0 * np.exp(2.0 * x),
                                  lambda x: 4.0 * np.exp(2.0 * x), lambda x: 8.0 * np.exp(2.0 * x)])
    assert prof.rescaled(amplitude=3.0).value(0.0) == pytest.approx(3.0)


def test_rescaled_and_translated():
    prof = EntropyProfile.exponential(1.0)
    scaled = prof.rescaled(amplitude=2.0, stretch=4.0)
    assert scaled.value(4.0) == pytest.approx(2.0 * prof.value(1.0))
    assert scaled.effective_q == pytest.approx(0.25)
    shifted = EntropyProfile.power(2.0).translated(0.5)
    assert shifted.value(1.5) == pytest.approx(1.0)
    assert shifted.offset == 0.5


def test_labels():
    assert EntropyProfile.power(-1.0).label() == "power(-1)"
    assert EntropyProfile.constant(1.0).describe() == {"family": "constant", "s0": 1.0}
