import pytest
from hypothesis import given, strategies as st

from treebound.params import (ParameterError, StarParams, TreeParams,
                              star_params, star_params_lambda)

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def tree_params(draw):
    beta = draw(unit)
    gamma = draw(st.floats(0.0, 1.0 - beta))
    return TreeParams(draw(unit), beta, gamma)


def test_valid_params_accepted():
    TreeParams(0.5, 0.2, 0.1)
    TreeParams(0.0, 0.0, 0.0)
    TreeParams(1.0, 0.0, 1.0)


@pytest.mark.parametrize("args, fragment", [
    ((1.0, 0.7, 0.4), "beta+gamma>1"),
    ((1.1, 0.1, 0.1), "alpha<=1"),
    ((-0.1, 0.1, 0.1), "alpha>=0"),
    ((0.5, -0.1, 0.1), "beta>=0"),
    ((0.5, 0.1, -0.1), "gamma>=0"),
    ((float("nan"), 0.1, 0.1), "alpha>=0"),
])
def test_invalid_params_name_the_inequality(args, fragment):
    with pytest.raises(ParameterError, match=fragment.replace("+", r"\+")):
        TreeParams(*args)


def test_star_params_rejects_out_of_domain():
    with pytest.raises(ParameterError):
        StarParams(0.6, 0.5)
    with pytest.raises(ParameterError):
        StarParams(-0.1, 0.5)


@pytest.mark.parametrize("raw, expected", [
    ((1.0, 0.3, 0.2), (0.2, 0.3)),   # leader case: (gamma, beta)
    ((0.4, 0.4, 0.6), (0.4, 0.0)),   # alpha == beta: (min(beta, gamma), max(0, beta - gamma))
    ((0.5, 0.2, 0.1), (0.1, 0.2)),
])
def test_star_params_examples(raw, expected):
    sp = star_params(TreeParams(*raw))
    assert sp.alpha_star == pytest.approx(expected[0], abs=1e-15)
    assert sp.beta_star == pytest.approx(expected[1], abs=1e-15)


@pytest.mark.parametrize("raw, lam, expected", [
    ((1.0, 0.3, 0.2), 1.0, (0.2, 0.3)),
    ((1.0, 0.3, 0.2), 0.0, (0.2, 0.3)),
    ((0.5, 0.2, 0.4), 0.0, (0.3, 0.2)),
])
def test_star_params_lambda_examples(raw, lam, expected):
    sp = star_params_lambda(TreeParams(*raw), lam)
    assert sp.alpha_star == pytest.approx(expected[0], abs=1e-15)
    assert sp.beta_star == pytest.approx(expected[1], abs=1e-15)


def test_lambda_outside_unit_interval_rejected():
    with pytest.raises(ParameterError):
        star_params_lambda(TreeParams(0.5, 0.2, 0.1), 1.5)


@given(tree_params(), unit)
def test_lambda_family_has_constant_sum(p, lam):
    sp = star_params_lambda(p, lam)
    assert sp.alpha_star + sp.beta_star == pytest.approx(
        min(p.beta + p.gamma, p.alpha), abs=4e-16)


@given(tree_params())
def test_lambda_one_is_star_params_exactly(p):
    assert star_params_lambda(p, 1.0) == star_params(p)


@given(tree_params(), unit)
def test_star_params_maximises_alpha_star(p, lam):
    assert star_params_lambda(p, lam).alpha_star <= star_params(p).alpha_star + 1e-15


@given(tree_params())
def test_star_params_sum_at_most_one(p):
    sp = star_params(p)
    assert sp.alpha_star >= 0 and sp.beta_star >= 0
    assert sp.alpha_star + sp.beta_star <= 1.0
