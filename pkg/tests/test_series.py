import math

import mpmath
import pytest

from gwtheta.environment import step_pgf_weight_one
from gwtheta.errors import CutoffExceeded, DomainError, GwThetaError
from gwtheta.harness import scenario_model
from gwtheta.series import (extend_pmf, pmf_from_theta_pgf, population_pmf,
                            step_pmf, write_pmf_csv)


def mp_taylor(theta, r, a, c, J, d=None):
    """Independent oracle: high-precision Taylor coefficients of the pgf."""
    with mpmath.workdps(60):
        if theta == 0.0:
            f = lambda s: r - d * (r - s) ** a
        else:
            f = lambda s: r - (a * (r - s) ** (-theta) + c) ** \
                (-1.0 / theta)
        return [float(x) for x in mpmath.taylor(f, 0, J)]


def build_or_partial(*args, **kwargs):
    """Heavy-tailed laws cannot meet the default tail tolerance; their
    coefficients are still exact in the partial attached to the error."""
    try:
        return pmf_from_theta_pgf(*args, **kwargs)
    except CutoffExceeded as err:
        return err.partial


def step_or_partial(model, n, **kwargs):
    try:
        return step_pmf(model, n, **kwargs)
    except CutoffExceeded as err:
        return err.partial


def test_geometric_case():
    # theta=1, r=1, a=c=1: the offspring law is geometric 2^{-(j+1)}
    pmf = pmf_from_theta_pgf(1.0, 1.0, 1.0, 1.0)
    for j in range(31):
        assert pmf.weight(j) == pytest.approx(2.0 ** -(j + 1), abs=1e-12)


def test_square_root_case():
    # theta=0, r=1, a=1/2, c=0: binomial series of 1 - (1-s)^{1/2}
    pmf = build_or_partial(0.0, 1.0, 0.5, 0.0)
    expected = [0.0, 0.5, 1 / 8, 1 / 16]
    for j, w in enumerate(expected):
        assert pmf.weight(j) == pytest.approx(w, abs=1e-12)


CASE_PARAMS = [
    (1.0, 1.0, 1.0, 1.0),       # (a)
    (0.5, 2.0, 0.5, 0.4),       # (b)
    (-0.5, 1.0, 0.5, 0.3),      # (c)
    (-0.5, 2.0, 0.5, 0.6),      # (d)
    (0.0, 1.0, 0.5, 0.3),       # (e)
    (0.0, 2.0, 0.5, 0.3),       # (f)
]


@pytest.mark.parametrize("theta,r,a,c", CASE_PARAMS)
def test_coefficients_match_mpmath(theta, r, a, c):
    pmf = build_or_partial(theta, r, a, c, max_cutoff=2 ** 14)
    J = min(60, pmf.cutoff)
    d = (r - c) ** (1.0 - a) if theta == 0.0 else None
    oracle = mp_taylor(theta, r, a, c, J, d)
    for j in range(J + 1):
        assert pmf.weight(j) == pytest.approx(oracle[j], abs=1e-11), j


@pytest.mark.parametrize("sid", ["Ex1", "Ex7i", "Ex10i", "Ex8i", "Ex6ii",
                                 "Ex9i"])
def test_step_pmf_weight_one_and_total(sid):
    model = scenario_model(sid)
    for n in (1, 5):
        pmf = step_or_partial(model, n, max_cutoff=2 ** 14)
        assert pmf.weight(1) == pytest.approx(step_pgf_weight_one(model, n),
                                              abs=1e-10)
        # total mass (including tail and defect) is 1
        assert pmf.total == pytest.approx(1.0, abs=1e-10)


def test_population_pmf_matches_step_composition_mass():
    model = scenario_model("Ex9i")
    pmf = population_pmf(model, 4)
    assert pmf.total == pytest.approx(1.0, abs=1e-10)
    assert pmf.defect_mass > 0.0       # defective case loses mass to Delta


def test_population_pmf_zero_weight_is_extinction_probability():
    from gwtheta.analytics import composed_pgf
    model = scenario_model("Ex7i")
    pmf = population_pmf(model, 6)
    assert pmf.weight(0) == pytest.approx(composed_pgf(model, 6, 0.0),
                                          abs=1e-12)


def test_heavy_tail_raises_cutoff_exceeded_with_partial():
    # theta = 1/2 composite laws have tails ~ j^{-3/2}: a 1e-9 tolerance
    # cannot be met within any reasonable cutoff, and the engine predicts
    # this instead of burning the full quadratic budget
    model = scenario_model("Ex1", theta=0.5)
    with pytest.raises(CutoffExceeded) as err:
        population_pmf(model, 5, tail_tol=1e-9, max_cutoff=2 ** 20)
    partial = err.value.partial
    assert partial is not None
    from gwtheta.analytics import composed_pgf
    assert partial.weight(0) == pytest.approx(composed_pgf(model, 5, 0.0),
                                              abs=1e-12)
    assert partial.tail_mass > 1e-9


def test_extend_pmf_prefix_stable():
    pmf = pmf_from_theta_pgf(1.0, 1.0, 1.0, 1.0)
    bigger = extend_pmf(pmf, pmf.cutoff * 4)
    assert bigger.cutoff == pmf.cutoff * 4
    for j in range(0, pmf.cutoff, 37):
        assert bigger.weight(j) == pytest.approx(pmf.weight(j), rel=1e-12)
    assert bigger.tail_mass <= pmf.tail_mass
    assert extend_pmf(pmf, 2) is pmf    # smaller cutoff is a no-op


def test_invalid_arguments():
    with pytest.raises(DomainError):
        pmf_from_theta_pgf(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        pmf_from_theta_pgf(1.0, 1.0, 1.0, 1.0, tail_tol=0.0)
    with pytest.raises(DomainError):
        pmf_from_theta_pgf(0.0, 1.0, 0.5, 1.5)


def test_weights_are_read_only():
    pmf = pmf_from_theta_pgf(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        pmf.weights[0] = 0.5


def test_csv_export(tmp_path):
    pmf = pmf_from_theta_pgf(1.0, 1.0, 1.0, 1.0)
    out = tmp_path / "pmf.csv"
    with out.open("w") as fh:
        write_pmf_csv(pmf, fh)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "j,weight"
    assert lines[1].startswith("0,0.5")
    assert lines[-1] == f"cutoff,{pmf.cutoff}"
