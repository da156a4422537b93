import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kothe_hankel.certificate import Status
from kothe_hankel.presets import parse_element, parse_symbol
from kothe_hankel.sequences import ExponentSequence, SpecParseError
from kothe_hankel.spaces import (Enveloped, FiniteSupport, KotheMatrix, SymbolSequence,
                                 TableRangeError, basis_element, dual_membership,
                                 load_element_csv, membership, nuclearity, parse_space,
                                 seminorm, seminorm_sup, weight)

LIN, LOG = ExponentSequence.linear(), ExponentSequence.log()
L1, LINF = KotheMatrix.power_series_finite(LIN), KotheMatrix.power_series_infinite(LIN)
mpmath.mp.dps = 50


def mp_seminorm(space, x, k):
    total = mpmath.mpf(0)
    for n, v in zip(x.indices.tolist(), x.dense()[x.indices - 1].tolist()):
        total += abs(mpmath.mpf(v)) * mpmath.exp(mpmath.mpf(space.log_weight(n, k)))
    return total


# -- weights ------------------------------------------------------------------------

def test_weight_examples():
    assert weight(LINF, 3, 2).log_magnitude == 6.0
    assert weight(L1, 8, 4).log_magnitude == -2.0
    lv = weight(KotheMatrix.power_series_infinite(LOG), 1, 3)
    assert lv.log_magnitude == pytest.approx(2.079442, abs=1e-6)
    assert lv.sign == "+"


@given(st.integers(1, 10_000), st.integers(1, 20))
def test_weights_nondecreasing_in_grade(n, k):
    for space in (L1, LINF, KotheMatrix.power_series_finite(LOG)):
        assert space.log_weight(n, k) <= space.log_weight(n, k + 1)


def test_log_weight_array_and_scalar():
    assert isinstance(LINF.log_weight(3, 1), float)
    np.testing.assert_array_equal(LINF.log_weight(np.array([1, 2]), 2), [2.0, 4.0])


def test_table_space_and_range_error(tmp_path):
    f = tmp_path / "w.csv"
    f.write_text("".join(f"{n},{k},{k * n}\n" for n in range(1, 5) for k in range(1, 4)))
    space = parse_space("table:@w.csv", base_dir=tmp_path)
    assert not space.is_montel
    assert space.log_weight(4, 3) == 12.0
    space.validate(4, 3)
    with pytest.raises(TableRangeError):
        space.log_weight(5, 1)
    f.write_text("1,1,0\n2,2,0\n")
    with pytest.raises(SpecParseError):
        parse_space("table:@w.csv", base_dir=tmp_path)


def test_validate_rejects_decreasing_grades():
    with pytest.raises(ValueError):
        KotheMatrix.from_table([[1.0, 0.0]]).validate(1, 2)
    with pytest.raises(ValueError):
        KotheMatrix.from_table([[-math.inf, -math.inf]]).validate(1, 2)


def test_parse_space_errors():
    assert parse_space("L1:log").kind == "finite"
    assert parse_space("Linf:power:p=2").alpha(3) == 9.0
    for bad in ("L2:linear", "Linf:bogus", "table:w.csv"):
        with pytest.raises(SpecParseError):
            parse_space(bad)


# -- elements ------------------------------------------------------------------------

def test_basis_element():
    assert basis_element(1).dense(4).tolist() == [1, 0, 0, 0]
    assert basis_element(3).dense(5).tolist() == [0, 0, 1, 0, 0]
    with pytest.raises(ValueError):
        basis_element(0)


def test_finite_support_invariants():
    x = FiniteSupport([3, 1, 2], [0.0, -2.0, 5.0])
    assert x.indices.tolist() == [1, 2]  # sorted, zero dropped
    np.testing.assert_allclose(x.dense(), [-2.0, 5.0], rtol=1e-15)
    with pytest.raises(ValueError):
        FiniteSupport([1, 1], [1.0, 2.0])
    with pytest.raises(ValueError):
        FiniteSupport([0], [1.0])


def test_enveloped_spot_check_rejects_bad_envelope():
    with pytest.raises(ValueError, match="envelope violated"):
        Enveloped(lambda n: -0.5 * n.astype(float), lambda n: -1.0 * n.astype(float))
    Enveloped(lambda n: -1.0 * n.astype(float), lambda n: -0.5 * n.astype(float))


def test_element_csv_and_specs(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("1,0.5\n4,-2\n")
    x = load_element_csv(f)
    np.testing.assert_allclose(x.dense(), [0.5, 0, 0, -2.0], rtol=1e-15)
    np.testing.assert_array_equal(parse_element("@x.csv", base_dir=tmp_path).dense(), x.dense())
    assert parse_element("basis:2").dense().tolist() == [0, 1]
    g = parse_element("gauss")
    assert g.values([1, 2]) == pytest.approx([math.exp(-1), math.exp(-4)])


def test_symbol_index_mapping():
    theta = SymbolSequence.from_values([7.0, 8.0])
    np.testing.assert_allclose(theta.values([0, 1]), [7.0, 8.0], rtol=1e-15)
    np.testing.assert_array_equal(theta.values([0, 1]), theta.coords.values([1, 2]))
    g = parse_symbol("gauss")
    assert g.log_abs([0, 2]).tolist() == [-1.0, -9.0]
    np.testing.assert_allclose(parse_symbol("geom:-2").values([0, 1, 2]), [1, -2, 4], rtol=1e-15)
    with pytest.raises(SpecParseError):
        parse_symbol("dualdecay:3")
    with pytest.raises(SpecParseError):
        parse_symbol("nosuch")


# -- seminorms ------------------------------------------------------------------------

def test_seminorm_basis_examples():
    r = seminorm(LINF, basis_element(1), 2, 1)
    assert r.value.log_magnitude == 2.0 and r.tail_bound.is_zero and r.finite
    for n in (1, 5, 40):
        for k in (1, 3):
            assert seminorm(LINF, basis_element(n), k, n).value.log_magnitude == k * n
            assert seminorm(KotheMatrix.power_series_infinite(LOG), basis_element(n), k,
                            n).value.log_magnitude == pytest.approx(k * math.log(n + 1))


def test_seminorm_gauss_oracle_and_tail():
    x = parse_element("gauss")
    r = seminorm(LINF, x, 1, 40)
    oracle = mpmath.fsum(mpmath.exp(-n * n + n) for n in range(1, 201))
    assert r.value.log_magnitude == pytest.approx(float(mpmath.log(oracle)), rel=1e-14, abs=1e-15)
    assert r.finite and r.tail_bound.log_magnitude <= -1600 + 41
    assert r.upper.log_magnitude >= float(mpmath.log(oracle))


def test_seminorm_ones_diverges():
    ones = parse_element("ones")
    for J in (10, 100, 1000):
        r = seminorm(LINF, ones, 1, J)
        assert r.diverged_at_scale and not r.finite


def test_seminorm_slow_decay_is_uncertified_not_divergent():
    # terms 1/n^2: converges, but no geometric envelope, so no certified tail
    x = Enveloped(lambda n: -2 * np.log(n.astype(float)))
    r = seminorm(L1, x, 10**6, 256)
    assert r.tail_bound is None and not r.diverged_at_scale


def test_seminorm_sup_examples():
    assert seminorm_sup(LINF, basis_element(1), 2, 1).value.log_magnitude == 2.0
    x = FiniteSupport([1, 2], [1.0, 1.0])
    assert seminorm_sup(L1, x, 1, 2).value.log_magnitude == -1.0
    # terms e^{-n^2 + n}: largest at n = 1 with value 1
    r = seminorm_sup(LINF, parse_element("gauss"), 1, 40)
    assert r.value.log_magnitude == 0.0 and r.finite


def test_seminorm_rejects_short_truncation_and_grade_zero():
    with pytest.raises(ValueError):
        seminorm(LINF, basis_element(5), 1, 4)
    with pytest.raises(ValueError):
        seminorm(LINF, basis_element(1), 0, 4)


supports = st.lists(st.tuples(st.integers(1, 64), st.floats(-1, 1).filter(lambda v: v != 0)),
                    min_size=1, max_size=64, unique_by=lambda p: p[0]).map(FiniteSupport.from_pairs)
spaces = st.sampled_from([L1, LINF, KotheMatrix.power_series_finite(LOG),
                          KotheMatrix.power_series_infinite(LOG)])


@given(supports, spaces, st.integers(1, 10))
def test_grade_monotonicity(x, space, k):
    assert seminorm(space, x, k, 64).value.log_magnitude <= \
        seminorm(space, x, k + 1, 64).value.log_magnitude + 1e-12


@given(supports, spaces, st.integers(1, 6))
def test_sup_below_sum_with_equality_for_single_term(x, space, k):
    s = seminorm_sup(space, x, k, 64).value.log_magnitude
    t = seminorm(space, x, k, 64).value.log_magnitude
    assert s <= t + 1e-12
    terms = np.sort(x.log_values + space.log_weight(x.indices, k))
    if len(x) == 1:
        assert s == t
    elif terms[-2] > terms[-1] - 30:  # otherwise the gap is below double resolution
        assert s < t


@given(supports, supports, spaces, st.integers(1, 4))
def test_triangle_inequality(x, y, space, k):
    n = np.arange(1, 65)
    s = FiniteSupport(n, x.values(n) + y.values(n))
    lhs = seminorm(space, s, k, 64).value
    rhs = seminorm(space, x, k, 64).value + seminorm(space, y, k, 64).value
    assert lhs.log_magnitude <= rhs.log_magnitude + 1e-12


@given(supports, spaces, st.integers(1, 4), st.floats(-1e3, 1e3).filter(lambda c: abs(c) > 1e-3))
def test_absolute_homogeneity(x, space, k, c):
    scaled = FiniteSupport(x.indices, x.values(x.indices) * c)
    a = seminorm(space, scaled, k, 64).value.log_magnitude
    b = seminorm(space, x, k, 64).value.log_magnitude + math.log(abs(c))
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


@given(supports, spaces, st.integers(1, 5))
def test_seminorm_matches_high_precision_sum(x, space, k):
    got = seminorm(space, x, k, 64).value.log_magnitude
    want = float(mpmath.log(mp_seminorm(space, x, k)))
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


@given(st.floats(0.05, 3.0), st.integers(1, 3), st.sampled_from([L1, LINF]))
def test_tail_soundness_when_truncation_grows(rate, k, space):
    # x_n = e^{-(k+rate) n^{1.2}}: decays fast enough for a certified tail on both spaces
    x = Enveloped(lambda n: -(k + rate) * n.astype(float) ** 1.2)
    previous = None
    for J in (8, 16, 32, 64, 128):
        r = seminorm(space, x, k, J)
        if previous is not None and previous.tail_bound is not None:
            lo, hi = previous.value.log_magnitude, previous.upper.log_magnitude
            assert lo - 1e-12 <= r.value.log_magnitude <= hi + 1e-12
        previous = r
    assert previous.finite


# -- membership, dual, nuclearity ---------------------------------------------------

def test_membership():
    c = membership(LINF, parse_element("gauss"), K_max=4, J=256)
    assert c.status is Status.CERTIFIED and len(c.evidence) == 4
    assert membership(LINF, parse_element("ones"), K_max=2, J=64).status is Status.REFUTED


def test_dual_membership_examples():
    c = dual_membership(L1, parse_symbol("dualdecay:3", alpha=LIN), K_max=8)
    assert c.status is Status.CERTIFIED
    # |theta_{n-1}| / a_{n,k} = e^{n/k - n/3}: already bounded at k = 3
    assert c.witness == {1: 3} and c.constants[1] == 0.0
    c = dual_membership(LINF, parse_symbol("ones"), K_max=2)
    assert c.status is Status.CERTIFIED and c.witness == {1: 1}
    assert c.constants[1] == pytest.approx(-1.0)  # sup_n e^{-n} = e^{-1}
    c = dual_membership(L1, parse_symbol(f"geom:{math.e}"), K_max=8)
    assert c.status is Status.REFUTED


def test_nuclearity_linf_spot_value():
    c = nuclearity(LINF, K_max=1, L_max=2, J=60)
    assert c.status is Status.CERTIFIED and c.witness == {1: 2}
    s = math.exp(c.details["partial_sums"][1]["log_partial_sum"])
    assert s == pytest.approx(1 / (math.e - 1), abs=1e-9)
    assert 1 / (math.e - 1) == pytest.approx(0.581977, abs=1e-6)


def test_nuclearity_l1_linear_certified():
    c = nuclearity(L1, K_max=4, L_max=8, J=4096)
    assert c.status is Status.CERTIFIED
    assert all(l > k for k, l in c.witness.items())


def test_nuclearity_l1_log_never_certified():
    c = nuclearity(KotheMatrix.power_series_finite(LOG), K_max=3, L_max=12, J=2**16)
    assert c.status is not Status.CERTIFIED and c.witness == {}


def test_nuclearity_argument_check():
    with pytest.raises(ValueError):
        nuclearity(L1, K_max=3, L_max=3)
