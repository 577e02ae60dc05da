import json
import math

import pytest
from hypothesis import given, strategies as st

from gwtheta.environment import (BOUND_SLACK, EnvSequence, ThetaModel,
                                 step_pgf, step_pgf_weight_one,
                                 validate_model)
from gwtheta.errors import DomainError, RejectedParameter


def test_harmonic_and_convergent_values():
    h = EnvSequence.harmonic()
    v = EnvSequence.convergent()
    assert h.value(1) == 0.5
    assert h.value(99) == 99 / 100
    assert v.value(1) == pytest.approx(4 / 6)
    # partial products telescope: prod a_i = 1/(n+1) and (n+3)/(3(n+1))
    prod_h = prod_v = 1.0
    for n in range(1, 40):
        prod_h *= h.value(n)
        prod_v *= v.value(n)
        assert prod_h == pytest.approx(1 / (n + 1), rel=1e-12)
        assert prod_v == pytest.approx((n + 3) / (3 * (n + 1)), rel=1e-12)


def test_alternating_values():
    a = EnvSequence.alternating_ex3("a")
    c = EnvSequence.alternating_ex3("c")
    assert [a.value(n) for n in range(1, 6)] == [0.5, 4.0, 0.25, 4.0, 0.25]
    assert [c.value(n) for n in range(1, 6)] == [1.0, 2.0, 1.0, 2.0, 1.0]


def test_dyadic_values():
    a = EnvSequence.dyadic_ex5("a")
    c = EnvSequence.dyadic_ex5("c")
    # a_n = n at n = 2^k - 1, 1/(n-1) at n = 2^k, else 1
    assert a.value(3) == 3.0
    assert a.value(4) == pytest.approx(1 / 3)
    assert a.value(5) == 1.0
    assert a.value(1) == 1.0          # n = 1 = 2^1 - 1
    # partial product equals n at n = 2^k - 1 and 1 elsewhere
    prod = 1.0
    for n in range(1, 70):
        prod *= a.value(n)
        expected = float(n) if (n + 1) & n == 0 else 1.0
        assert prod == pytest.approx(expected, rel=1e-12)
    assert c.value(4) == 1.0
    assert c.value(2) == 0.25
    assert c.value(9) == pytest.approx(1 / 81)


def test_exp_tail_values_and_exact_log():
    c = EnvSequence.exp_tail_ex6(1.0)
    assert c.value(1) == pytest.approx(1 - math.exp(-1))
    # beyond n = 36 the value saturates just below 1, but the log channel
    # keeps the exact exponent
    assert c.value(100) < 1.0
    assert c.log_one_minus(100) == -100.0
    c2 = EnvSequence.exp_tail_ex6(0.5)
    assert c2.log_one_minus(9) == -3.0


def test_log_one_minus_generic():
    c = EnvSequence.constant(0.25)
    assert c.log_one_minus(5) == pytest.approx(math.log(0.75))
    assert EnvSequence.constant(1.0).log_one_minus(1) is None


def test_table_family():
    t = EnvSequence.from_table([0.5, 0.6])
    assert t.value(1) == 0.5
    assert t.value(7) == 0.6          # repeat_last
    strict = EnvSequence.from_table([0.5], tail_rule="error")
    with pytest.raises(DomainError):
        strict.value(2)


def test_unknown_family_rejected():
    with pytest.raises(RejectedParameter):
        EnvSequence("nope")


def test_sequence_index_must_be_positive():
    with pytest.raises(DomainError):
        EnvSequence.harmonic().value(0)


# -- model validation ---------------------------------------------------------

def _simple_model(theta, r, a, c, horizon=20):
    return validate_model(theta, r, EnvSequence.constant(a),
                          EnvSequence.constant(c), check_horizon=horizon)


def test_case_labels():
    assert _simple_model(0.5, 1.0, 0.9, 0.2).case_label == "a"
    assert _simple_model(0.5, 2.0, 0.5, 0.4).case_label == "b"
    assert _simple_model(-0.5, 1.0, 0.5, 0.3).case_label == "c"
    assert _simple_model(-0.5, 2.0, 0.5, 0.6).case_label == "d"
    assert _simple_model(0.0, 1.0, 0.5, 0.3).case_label == "e"
    assert _simple_model(0.0, 2.0, 0.5, 0.3).case_label == "f"


def test_theta_minus_one_rejected():
    with pytest.raises(RejectedParameter):
        _simple_model(-1.0, 1.0, 0.5, 0.3)


def test_theta_out_of_range_rejected():
    for theta in (1.5, -1.2):
        with pytest.raises(RejectedParameter):
            _simple_model(theta, 1.0, 0.5, 0.3)


def test_r_below_one_rejected():
    with pytest.raises(RejectedParameter):
        _simple_model(0.5, 0.9, 0.5, 0.3)


def test_case_a_constraints():
    # c_n >= 1 - a_n violated
    with pytest.raises(RejectedParameter) as err:
        _simple_model(1.0, 1.0, 0.5, 0.4)
    assert err.value.index == 1
    # a_n > 1 allowed in case (a) only
    validate_model(1.0, 1.0, EnvSequence.superharmonic_ex4("a"),
                   EnvSequence.superharmonic_ex4("c"))
    with pytest.raises(RejectedParameter):
        _simple_model(0.0, 1.0, 1.5, 0.3)


def test_case_b_band():
    # admissible band for theta=1, r=2, a=1/2: c in [(1-a)/2, 1-a]
    _simple_model(1.0, 2.0, 0.5, 0.25)
    _simple_model(1.0, 2.0, 0.5, 0.5)
    with pytest.raises(RejectedParameter):
        _simple_model(1.0, 2.0, 0.5, 0.24)
    with pytest.raises(RejectedParameter):
        _simple_model(1.0, 2.0, 0.5, 0.51)


def test_case_d_band_is_reversed():
    # theta=-1/2, r=2: c in [(1-a)(r-1)^{1/2}, (1-a) r^{1/2}]
    _simple_model(-0.5, 2.0, 0.5, 0.5)
    _simple_model(-0.5, 2.0, 0.5, 0.5 * math.sqrt(2))
    with pytest.raises(RejectedParameter):
        _simple_model(-0.5, 2.0, 0.5, 0.49)
    with pytest.raises(RejectedParameter):
        _simple_model(-0.5, 2.0, 0.5, 0.72)


def test_bound_slack_absorbs_roundoff():
    c = 0.5 * (1.0 - BOUND_SLACK / 2)
    _simple_model(1.0, 2.0, 0.5, c * 0.5 / 0.5)  # just inside slack


def test_lazy_validation_beyond_horizon():
    # table that turns invalid at n = 3; check_horizon = 2 defers the error
    a = EnvSequence.from_table([0.5, 0.5, -1.0])
    c = EnvSequence.constant(0.6)
    model = validate_model(1.0, 1.0, a, c, check_horizon=2)
    with pytest.raises(RejectedParameter) as err:
        model.step(3)
    assert err.value.index == 3


# -- one-step pgf -------------------------------------------------------------

def test_step_pgf_is_a_proper_pgf_shape():
    model = _simple_model(1.0, 1.0, 1.0, 1.0)
    # f(s) = 1 - ((1-s)^{-1} + 1)^{-1} = 1/(2-s)
    for s in (0.0, 0.3, 0.9):
        assert step_pgf(model, 1, s) == pytest.approx(1 / (2 - s))
    assert step_pgf(model, 1, 1.0) == 1.0


def test_step_pgf_theta_zero():
    model = _simple_model(0.0, 1.0, 0.5, 0.19)
    # f(s) = 1 - (1-c)^{1/2} (1-s)^{1/2}
    assert step_pgf(model, 1, 0.0) == pytest.approx(1 - math.sqrt(0.81))
    assert step_pgf(model, 1, 1.0) == 1.0


def test_step_pgf_at_r_defective_case():
    model = _simple_model(-0.5, 1.0, 0.5, 0.25)
    # f(1) = 1 - c^{-1/theta} = 1 - c^2 < 1: mass escapes to the graveyard
    assert step_pgf(model, 1, 1.0) == pytest.approx(1 - 0.25 ** 2)


def test_step_pgf_weight_one_matches_derivative():
    for theta, r, a, c in ((1.0, 1.0, 1.0, 1.0), (0.5, 2.0, 0.5, 0.4),
                           (-0.5, 1.0, 0.5, 0.3), (0.0, 2.0, 0.5, 0.3)):
        model = _simple_model(theta, r, a, c)
        h = 1e-7
        num = (step_pgf(model, 1, h) - step_pgf(model, 1, 0.0)) / h
        assert step_pgf_weight_one(model, 1) == pytest.approx(num, rel=1e-5)


def test_step_pgf_domain():
    model = _simple_model(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        step_pgf(model, 1, 1.5)
    r2 = _simple_model(1.0, 2.0, 0.5, 0.4)
    assert step_pgf(r2, 1, 1.5) < 2.0   # s up to r is fine


# -- serialization ------------------------------------------------------------

def test_model_round_trip():
    model = validate_model(
        1.0, 1.0, EnvSequence.harmonic(),
        EnvSequence.proportional_c(1.0, EnvSequence.harmonic()))
    spec = json.loads(json.dumps(model.to_dict()))
    again = ThetaModel.from_dict(spec)
    assert again == model


def test_sequence_round_trip_with_table():
    seq = EnvSequence.from_table([0.5, 0.75], tail_rule="error")
    assert EnvSequence.from_dict(json.loads(json.dumps(seq.to_dict()))) == seq


@given(st.floats(0.01, 0.99), st.floats(0.0, 0.99))
def test_case_e_constant_models_validate(a, c):
    model = _simple_model(0.0, 1.0, a, c, horizon=5)
    p1 = step_pgf_weight_one(model, 1)
    assert 0.0 <= p1 <= 1.0
    assert 0.0 <= step_pgf(model, 1, 0.0) <= 1.0
