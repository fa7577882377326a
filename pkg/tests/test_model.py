import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chi_spt.errors import (
    AssumptionError, ConfigError, DimensionError, ExprSyntaxError, NonFiniteError, UnknownIdentifierError,
)
from chi_spt.model import (
    LIN1_CONFIG, Box, ChiSystem, builtin_system, eval_f, eval_g, format_system, parse_config,
    parse_system_config, validate_assumptions,
)

from conftest import lin1_f, lin1_g, sat1_g


def _lin1_with(line_old, line_new):
    return LIN1_CONFIG.replace(line_old, line_new)


def test_lin1_matches_hand_coded_closures(lin1):
    rng = np.random.default_rng(7)
    for x, z, w in rng.uniform(-2, 2, size=(5, 3)):
        assert eval_f(lin1, [w])[0] == pytest.approx(lin1_f([w])[0], rel=1e-15)
        assert eval_g(lin1, [x], [z], [w])[0] == pytest.approx(lin1_g([x], [z], [w])[0], rel=1e-15, abs=1e-15)


def test_parsed_lin1_fields(lin1):
    assert (lin1.n_x, lin1.m_z, lin1.mu, lin1.name) == (1, 1, 0.1, "LIN1")
    np.testing.assert_array_equal(lin1.domain_x.lo, [-2.0])
    np.testing.assert_array_equal(lin1.domain_z.hi, [2.0])


def test_eval_examples(lin1, sat1):
    assert eval_f(lin1, [0.0]).tolist() == [0.0]
    assert eval_f(lin1, [0.3]).tolist() == [-0.3]
    assert eval_g(lin1, [1], [2], [0]).tolist() == [1.25]
    assert eval_g(sat1, [0], [0], [0.1]).tolist() == [0.1]


def test_eval_dimension_errors(lin1):
    with pytest.raises(DimensionError):
        eval_f(lin1, [0.1, 0.2])
    with pytest.raises(DimensionError):
        eval_g(lin1, [1, 2], [0], [0])


def test_eval_at_origin_is_zero(builtin, coupled2):
    for sys in (builtin, coupled2):
        assert not np.any(eval_g(sys, np.zeros(sys.n_x), np.zeros(sys.m_z), np.zeros(sys.m_z)))
        assert not np.any(eval_f(sys, np.zeros(sys.m_z)))


def test_singularity_reported_as_non_finite():
    sys = parse_system_config(_lin1_with("g1 = 0.25*x1 + 0.5*z1 + w1", "g1 = z1 / (x1 + 1)"))
    with pytest.raises(NonFiniteError):
        eval_g(sys, [-1.0], [1.0], [0.0])


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_referential_transparency(x, z, w):
    sys = builtin_system("SAT1")
    a = eval_g(sys, [x], [z], [w])
    b = eval_g(sys, [x], [z], [w])
    assert a.tobytes() == b.tobytes()
    assert a[0] == pytest.approx(sat1_g([x], [z], [w])[0], rel=1e-15, abs=1e-15)


# --- config parsing -------------------------------------------------------------

def test_syntax_error_location():
    text = _lin1_with("g1 = 0.25*x1 + 0.5*z1 + w1", "g1 = z1 +")
    with pytest.raises(ExprSyntaxError) as info:
        parse_system_config(text)
    line_no = text.splitlines().index("g1 = z1 +") + 1
    assert info.value.line == line_no
    assert info.value.column == len("g1 = z1 +") + 1


def test_unknown_identifier_in_config():
    with pytest.raises(UnknownIdentifierError):
        parse_system_config(_lin1_with("g1 = 0.25*x1 + 0.5*z1 + w1", "g1 = z1 + z2"))


def test_f_may_not_use_fast_state():
    with pytest.raises(UnknownIdentifierError):
        parse_system_config(_lin1_with("f1 = -w1", "f1 = -z1"))


@pytest.mark.parametrize("old,new", [
    ("g1 = 0.25*x1 + 0.5*z1 + w1", "g1 = 0.5*z1\ng2 = z1"),
    ("f1 = -w1", "f1 = -w1\nf2 = w1"),
    ("f1 = -w1", "f0 = -w1"),
])
def test_component_count_mismatch(old, new):
    with pytest.raises(ConfigError):
        parse_system_config(_lin1_with(old, new))


def test_origin_assumption_enforced():
    with pytest.raises(AssumptionError):
        parse_system_config(_lin1_with("g1 = 0.25*x1 + 0.5*z1 + w1", "g1 = 0.5*z1 + 1"))


@pytest.mark.parametrize("bad", [
    "n_x = 1\nm_z = 1\nmu = 0.1\nf1 = -w1\n",                       # missing g1
    "n_x = 1\nm_z = 1\nf1 = -w1\ng1 = z1*0.5\n",                    # missing mu
    "n_x = 1\nn_x = 1\nm_z = 1\nmu = 0.1\nf1 = -w1\ng1 = 0.5*z1\n",  # duplicate key
    "n_x = one\nm_z = 1\nmu = 0.1\nf1 = -w1\ng1 = 0.5*z1\n",
    "n_x = 1\nm_z = 1\nmu = -0.1\nf1 = -w1\ng1 = 0.5*z1\n",
    "n_x = 1\nm_z = 1\nmu = 0.1\nf1 = -w1\ng1 = 0.5*z1\nbogus = 3\n",
    "n_x = 1\nm_z = 1\nmu = 0.1\nf1 = -w1\ng1 = 0.5*z1\ndomain_x = 1, 2\n",
    "n_x = 1\nm_z = 1\nmu = 0.1\nf1 = -w1\ng1 = 0.5*z1\njust some words\n",
])
def test_malformed_documents(bad):
    with pytest.raises(ConfigError):
        parse_system_config(bad)


def test_overrides_and_per_axis_domains():
    cfg = parse_config(
        "n_x = 2\nm_z = 1\nmu = 0.05  # small\n"
        "f1 = -w1\nf2 = 0.5*w1\ng1 = 0.1*x1 + 0.2*x2 + 0.3*z1\n"
        "domain_x = -1, 1\ndomain_x2 = -3, 0.5\n"
        "solver.tol = 1e-13\nanalysis.mu_values = 0.1, 0.01\nanalysis.N = 500\n"
    )
    assert cfg.solver == {"tol": 1e-13}
    assert cfg.analysis == {"mu_values": [0.1, 0.01], "N": 500}
    assert cfg.domain_x.lo.tolist() == [-1.0, -3.0]
    assert cfg.domain_x.hi.tolist() == [1.0, 0.5]
    assert cfg.domain_z.lo.tolist() == [-2.0]


def test_format_round_trip(coupled2):
    again = parse_system_config(format_system(coupled2))
    assert again.f_exprs == coupled2.f_exprs and again.g_exprs == coupled2.g_exprs
    assert again.mu == coupled2.mu
    rng = np.random.default_rng(0)
    x, z, w = rng.normal(size=(3, 2))
    assert eval_g(again, x, z, w).tobytes() == eval_g(coupled2, x, z, w).tobytes()


def test_system_constructor_checks():
    f = lambda w: -w
    g = lambda x, z, w: 0.5 * z
    with pytest.raises(ValueError):
        ChiSystem(1, 1, f, g, -0.1)
    with pytest.raises(ValueError):
        ChiSystem(1, 1, f, g, 0.1, Box([0.5], [1.0]))
    with pytest.raises(DimensionError):
        ChiSystem(0, 1, f, g, 0.1)
    sys = ChiSystem(1, 1, f, g, 0.1)
    assert sys.with_mu(0.0).mu == 0.0


# --- assumption validation ------------------------------------------------------

def test_validate_lin1(lin1):
    rep = validate_assumptions(lin1, 1000, 42)
    assert rep.invertibility_margin == pytest.approx(0.5, abs=1e-8)
    assert rep.lipschitz_f == pytest.approx(1.0, abs=1e-9)
    assert rep.lipschitz_kind == "estimate"
    assert rep.ok


def test_validate_sat1(sat1):
    rep = validate_assumptions(sat1, 1000, 42)
    assert 0.5 <= rep.invertibility_margin <= 1.0
    assert rep.ok


def test_validate_singular_manifold(singular_manifold):
    rep = validate_assumptions(singular_manifold, 200, 42)
    assert rep.invertibility_margin < 1e-10
    assert not rep.invertibility_ok and not rep.ok


def test_every_builtin_passes_with_defaults(builtin):
    assert validate_assumptions(builtin).ok


def test_validate_rejects_bad_budget(lin1):
    with pytest.raises(ValueError):
        validate_assumptions(lin1, 0, 1)
