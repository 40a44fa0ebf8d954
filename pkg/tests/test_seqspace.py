import math

import numpy as np
import pytest

from derivlab.errors import ParameterError, SizeError
from derivlab.seqspace import (
    SeqVector,
    c0,
    dual_norm,
    dual_of,
    lp,
    norm,
    norm_dense,
    norming_functionals,
    parse_space,
    tsirelson,
    tsirelson2,
    weighted_l2,
)
from derivlab.seqspace.dual import dual_norm_dense
from derivlab.seqspace.tsirelson import norming_functional, tsirelson_norm

from oracles import cvxpy_t2_dual, cvxpy_t_dual, sampled_dual_lower, tsirelson_bruteforce


# -- SeqVector -------------------------------------------------------------

def test_vector_canonical_form():
    v = SeqVector.from_dense([0.0, 2.0, 0.0, -1.0])
    assert v.indices == (2, 4) and v.values == (2.0, -1.0)
    assert v.dim == 4
    with pytest.raises(ValueError):
        SeqVector((2, 1), (1.0, 1.0))
    with pytest.raises(ValueError):
        SeqVector((1,), (0.0,))


def test_vector_json_round_trip():
    v = SeqVector.from_mapping({3: 0.1, 7: -2.5})
    assert SeqVector.from_json(v.to_json()) == v


@pytest.mark.parametrize("text,field", [
    ('{"indices":[1],"valuez":[1]}', "values"),
    ('{"indices":["a"],"values":[1]}', "indices"),
    ('{"indices":[2,1],"values":[1,1]}', "indices"),
])
def test_vector_json_errors_name_field(text, field):
    with pytest.raises(ValueError, match=field):
        SeqVector.from_json(text)


def test_vector_arithmetic():
    a = SeqVector.from_mapping({1: 1.0, 2: 2.0})
    b = SeqVector.from_mapping({2: -2.0, 5: 1.0})
    assert (a + b).as_dict() == {1: 1.0, 5: 1.0}
    assert (a * b).as_dict() == {2: -4.0}
    assert (a * 0).is_zero()


# -- norms -----------------------------------------------------------------

def test_tsirelson_basis_vector():
    assert norm(tsirelson(4), SeqVector.basis(1)) == 1.0


def test_tsirelson_e3_e4():
    x = SeqVector.ones((3, 4))
    assert norm(tsirelson(4), x) == 1.0
    assert tsirelson_bruteforce(x.to_dense()) == 1.0


@pytest.mark.parametrize("n", [2, 4, 8])
def test_tsirelson_tail_block(n):
    x = SeqVector.ones(range(n + 1, 2 * n + 1))
    assert norm(tsirelson(2 * n), x) == n / 2
    assert tsirelson_bruteforce(x.to_dense()) == n / 2


def test_tsirelson2_e3_e4():
    x = SeqVector.ones((3, 4), 1 / math.sqrt(2))
    assert norm(tsirelson2(4), x) == pytest.approx(1 / math.sqrt(2), rel=1e-15)


def test_lp_homogeneity_example():
    assert norm(lp(2, 5), SeqVector.basis(5, 3.0)) == 3.0


def test_empty_vector_norm_is_zero():
    assert norm(tsirelson(4), SeqVector()) == 0.0


def test_bad_exponent():
    with pytest.raises(ParameterError):
        lp(0.5)
    with pytest.raises(ParameterError):
        parse_space("lp:0.5")


def test_weights_below_one_rejected():
    with pytest.raises(ParameterError):
        weighted_l2([1.0, 0.5])


def test_support_bound_enforced():
    with pytest.raises(ParameterError):
        norm(lp(2, 3), SeqVector.basis(4))


@pytest.mark.parametrize("seed", range(5))
def test_dp_matches_bruteforce(seed):
    rng = np.random.default_rng(seed)
    for _ in range(10):
        n = int(rng.integers(1, 7))
        x = rng.random(n) * (rng.random(n) < 0.8)
        assert tsirelson_norm(x) == tsirelson_bruteforce(x)


def test_norming_functional_traceback():
    rng = np.random.default_rng(1)
    for n in (5, 12, 16):
        x = rng.random(n)
        val, f = norming_functional(x)
        assert f @ x == pytest.approx(val, rel=1e-14)


def test_parse_space_grammar(tmp_path):
    assert parse_space("l1") == lp(1.0)
    assert parse_space("lp:3").p == 3.0
    assert parse_space("T2").kind == "T2"
    assert parse_space("dual:dual:T") == tsirelson()
    w = tmp_path / "w.csv"
    w.write_text("1,2,3")
    s = parse_space(f"wl2:{w}", 3)
    assert s.kind == "wl2" and s.weights == (1.0, 2.0, 3.0)
    with pytest.raises(ParameterError):
        parse_space("foo")


# -- norming set -----------------------------------------------------------

def test_norming_set_small_cases():
    assert norming_functionals(1).functionals.tolist() == [[1.0]]
    assert sorted(map(tuple, norming_functionals(2).functionals.tolist())) == [(0.0, 1.0), (1.0, 0.0)]
    ns = norming_functionals(4)
    assert ns.induced_norms(np.array([[0, 0, 1.0, 1.0]]))[0] == 1.0


def test_norming_set_contains_coordinates():
    ns = norming_functionals(8)
    for j in range(8):
        e = np.zeros(8)
        e[j] = 1
        assert any(np.array_equal(f, e) for f in ns.functionals)


@pytest.mark.parametrize("n", [4, 8, 10])
def test_norming_set_matches_dp(n):
    rng = np.random.default_rng(n)
    X = rng.random((1000, n)) * (rng.random((1000, n)) < 0.8)
    ns = norming_functionals(n)
    dp = np.array([tsirelson_norm(x) for x in X])
    ind = ns.induced_norms(X)
    mask = dp > 0
    assert np.max(np.abs(ind[mask] - dp[mask]) / dp[mask]) <= 1e-12


def test_norming_set_cap():
    with pytest.raises(SizeError, match="estimated cardinality"):
        norming_functionals(16)


# -- dual norms ------------------------------------------------------------

def test_dual_examples():
    assert dual_norm(lp(1, 2), SeqVector.ones((1, 2))).value == 1.0
    assert dual_norm(c0(4), SeqVector.ones(range(1, 5))).value == 4.0
    # e3+e4 has T-norm 1 and pairs to 2 with itself; l1 bounds the dual norm by 2
    r = dual_norm(tsirelson(4), SeqVector.ones((3, 4)))
    assert r.lower == pytest.approx(2.0, abs=1e-12) and r.upper == pytest.approx(2.0, abs=1e-12)


def test_dual_weighted():
    w = [1.0, 2.0, 4.0]
    y = np.array([1.0, -1.0, 0.5])
    assert dual_norm_dense(weighted_l2(w), y).value == pytest.approx(np.linalg.norm(np.array(w) * y))


def test_tsirelson_dual_against_sampling():
    rng = np.random.default_rng(3)
    for n in (4, 6):
        y = rng.random(n)
        lp_val = dual_norm_dense(tsirelson(n), y).value
        est = sampled_dual_lower(lambda X: np.array([tsirelson_norm(x) for x in X]), y, 4000)
        assert est <= lp_val * (1 + 1e-9)
        assert est >= 0.97 * lp_val


def test_tsirelson_dual_pairing_inequality():
    rng = np.random.default_rng(4)
    for _ in range(100):
        x, y = rng.standard_normal(6), rng.standard_normal(6)
        assert abs(x @ y) <= tsirelson_norm(x) * dual_norm_dense(tsirelson(6), y).upper * (1 + 1e-9)


def test_dual_lp_matches_cvxpy():
    rng = np.random.default_rng(5)
    F = norming_functionals(8).functionals
    for _ in range(3):
        y = rng.random(8)
        assert dual_norm_dense(tsirelson(8), y).value == pytest.approx(cvxpy_t_dual(F, y), rel=1e-7)


def test_t2_dual_matches_cvxpy():
    rng = np.random.default_rng(6)
    F = norming_functionals(8).functionals
    for _ in range(3):
        y = rng.random(8) * (rng.random(8) < 0.8)
        r = dual_norm_dense(tsirelson2(8), y)
        ref = cvxpy_t2_dual(F, y)
        assert r.certified
        assert r.lower <= ref * (1 + 1e-7) and ref <= r.upper * (1 + 1e-7)


def test_t2_dual_beyond_materialized_set():
    y = np.random.default_rng(7).random(12)
    r = dual_norm_dense(tsirelson2(12), y)
    assert r.lower <= r.upper and r.certified


def test_bidual_equals_primal():
    rng = np.random.default_rng(8)
    for _ in range(5):
        x = rng.standard_normal(6)
        for B in (tsirelson2(6), lp(3, 6), c0(6)):
            assert norm_dense(dual_of(dual_of(B)), x) == norm_dense(B, x)
            # dual of the dual kind through the solver
            assert dual_norm_dense(dual_of(B), x).value == pytest.approx(norm_dense(B, x), rel=1e-6)
