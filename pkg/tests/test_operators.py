import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kothe_hankel.operators import (OperatorSpec, apply, cesaro_mean, cesaro_vector, column,
                                    dense_matrix, fast_apply, hankel_column,
                                    iterated_shift_vs_column, shift, toeplitz_column)
from kothe_hankel.presets import parse_symbol
from kothe_hankel.sequences import ExponentSequence
from kothe_hankel.spaces import FiniteSupport, KotheMatrix, SymbolSequence, basis_element

LINF = KotheMatrix.power_series_infinite(ExponentSequence.linear())
DELTA = SymbolSequence.from_values([1.0])
IDX = np.arange(1, 65)


def close(a, b, rtol=1e-12):
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.maximum(np.abs(a), np.abs(b))
    assert np.all(np.abs(a - b) <= rtol * scale + 1e-300), np.max(np.abs(a - b) / np.maximum(scale, 1e-300))


def symbol_from(vals):
    return SymbolSequence.from_values(vals)


symbols = st.lists(st.floats(-1, 1), min_size=1, max_size=64).map(symbol_from)
elements = st.lists(st.tuples(st.integers(1, 64), st.floats(-1, 1).filter(lambda v: v != 0)),
                    min_size=1, max_size=64, unique_by=lambda p: p[0]).map(FiniteSupport.from_pairs)


# -- columns ---------------------------------------------------------------------------

def test_hankel_column_examples():
    np.testing.assert_array_equal(hankel_column(DELTA, 1).values(IDX[:4]), [1, 0, 0, 0])
    assert not np.any(hankel_column(DELTA, 2).values(IDX))
    theta = SymbolSequence.from_log(lambda j: np.log(np.maximum(j, 1e-300)), label="j")
    close(hankel_column(theta, 3).values(IDX[:4]), [2, 3, 4, 5])


def test_toeplitz_column_examples():
    np.testing.assert_array_equal(toeplitz_column(DELTA, 3).values(IDX[:5]), [0, 0, 1, 0, 0])
    theta = SymbolSequence.from_log(lambda j: np.log(j + 1.0))
    close(toeplitz_column(theta, 2).values(IDX[:4]), [0, 1, 2, 3])


def test_shift_columns_are_basis_vectors():
    assert column(OperatorSpec.forward(), 2).indices.tolist() == [3]
    assert column(OperatorSpec.backward(), 2).indices.tolist() == [1]
    assert len(column(OperatorSpec.backward(), 1)) == 0


@given(symbols, st.integers(1, 64))
def test_hankel_column_shift_law(theta, n):
    np.testing.assert_array_equal(hankel_column(theta, n + 1).values(IDX),
                                  hankel_column(theta, n).values(IDX + 1))


@given(symbols)
def test_first_column_is_the_symbol(theta):
    np.testing.assert_array_equal(hankel_column(theta, 1).values(IDX), theta.values(IDX - 1))


@given(symbols, st.integers(1, 64))
def test_toeplitz_forward_law(theta, n):
    np.testing.assert_array_equal(toeplitz_column(theta, n + 1).values(IDX),
                                  shift("forward", toeplitz_column(theta, n)).values(IDX))


def test_column_laws_on_infinite_symbol():
    g = parse_symbol("geomgauss:0.5")
    for n in (1, 7, 30):
        np.testing.assert_array_equal(hankel_column(g, n + 1).values(IDX),
                                      hankel_column(g, n).values(IDX + 1))
        np.testing.assert_array_equal(toeplitz_column(g, n + 1).values(IDX),
                                      shift("forward", toeplitz_column(g, n)).values(IDX))


# -- apply -------------------------------------------------------------------------------

def test_apply_examples():
    r = apply(OperatorSpec.hankel(DELTA), basis_element(1), 1, 4)
    np.testing.assert_array_equal(r.dense(), [1, 0, 0, 0])
    # theta_0..theta_2 = 1: coordinates 1..3 of the symbol are 1
    theta = symbol_from([1, 1, 1])
    r = apply(OperatorSpec.hankel(theta), FiniteSupport([1, 2], [1, 1]), 2, 4)
    close(r.dense(), [2, 2, 1, 0])
    close(dense_matrix(OperatorSpec.hankel(theta), 4, 4) @ [1, 1, 0, 0], [2, 2, 1, 0])
    r = apply(OperatorSpec.forward(), FiniteSupport.from_dense([3.0, 5.0, 7.0]), 3, 5)
    close(r.dense(), [0, 3, 5, 7, 0])


@pytest.mark.parametrize("kind", ["hankel", "toeplitz"])
@given(theta=symbols, x=elements)
def test_apply_matches_dense_matrix(kind, theta, x):
    op = OperatorSpec(kind, theta)
    J, R = 64, 128
    want = dense_matrix(op, R, J) @ x.dense(J)
    got = apply(op, x, J, R).dense()
    # compare to a high-precision oracle where the float product may cancel
    for i in np.flatnonzero(np.abs(got - want) > 1e-12 * np.maximum(np.abs(got), np.abs(want))):
        exact = mp_row(op, x, i + 1, J)
        assert abs(got[i] - exact) <= 1e-12 * abs(exact) + 1e-300 or abs(exact) < 1e-280


def mp_row(op, x, row, J):
    mpmath.mp.dps = 40
    total = mpmath.mpf(0)
    for n, v in zip(x.indices.tolist(), x.values(x.indices).tolist()):
        total += mpmath.mpf(v) * mpmath.mpf(float(column(op, n).values([row])[0]))
    return float(total)


@given(symbols, symbols, elements, elements, st.floats(-3, 3))
def test_apply_linear_in_symbol_and_element(t1, t2, x, y, c):
    J, R = 64, 96
    n = np.arange(1, 129)
    t_sum = SymbolSequence.from_values(t1.values(n - 1) + c * t2.values(n - 1))
    x_sum = FiniteSupport(n, x.values(n) + c * y.values(n))
    for kind in ("hankel", "toeplitz"):
        lhs = apply(OperatorSpec(kind, t_sum), x, J, R).dense()
        rhs = apply(OperatorSpec(kind, t1), x, J, R).dense() + c * apply(OperatorSpec(kind, t2), x, J, R).dense()
        scale = np.max(np.abs(dense_matrix(OperatorSpec(kind, t1), R, J)) @ np.abs(x.dense(J))) \
            + abs(c) * np.max(np.abs(dense_matrix(OperatorSpec(kind, t2), R, J)) @ np.abs(x.dense(J)))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(scale, 1e-300)
        op = OperatorSpec(kind, t1)
        lhs = apply(op, x_sum, J, R).dense()
        rhs = apply(op, x, J, R).dense() + c * apply(op, y, J, R).dense()
        scale = np.max(np.abs(dense_matrix(op, R, J)) @ (np.abs(x.dense(J)) + abs(c) * np.abs(y.dense(J))))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(scale, 1e-300)


def test_apply_extreme_magnitudes_stay_in_log_domain():
    theta = parse_symbol("gauss")
    r = apply(OperatorSpec.hankel(theta), basis_element(1), 1, 40)
    assert r.coordinates.log_abs([40])[0] == -1600.0  # e^{-1600} underflows as a float


def test_apply_residual_report():
    theta = parse_symbol("gauss")
    r = apply(OperatorSpec.hankel(theta), basis_element(2), 2, 30, codomain=LINF, grades=(1, 2))
    assert r.exact
    assert set(r.residual_report) == {1, 2}
    for v in r.residual_report.values():
        assert v is not None and v.log_magnitude < -900
    ones = parse_symbol("ones")
    r = apply(OperatorSpec.hankel(ones), basis_element(1), 1, 30, codomain=LINF, grades=(1,))
    assert r.residual_report[1] is None


def test_apply_to_csv_and_dict():
    r = apply(OperatorSpec.hankel(DELTA), basis_element(1), 1, 2)
    assert r.to_csv().splitlines()[0] == "index,value"
    assert r.to_dict()["R"] == 2


# -- fast_apply ----------------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["hankel", "toeplitz"])
@given(theta=symbols, x=elements, R=st.sampled_from([64, 300, 1024]))
def test_fast_apply_agrees_with_apply(kind, theta, x, R):
    op = OperatorSpec(kind, theta)
    a = apply(op, x, 64, R).dense()
    b = fast_apply(op, x, 64, R).dense()
    close(a, b, rtol=1e-10)


def test_fast_apply_large_random_case_uses_convolution():
    rng = np.random.default_rng(3)
    theta = SymbolSequence.from_values(rng.uniform(-1, 1, 2048))
    x = FiniteSupport.from_dense(rng.uniform(-1, 1, 1024))
    for kind in ("hankel", "toeplitz"):
        op = OperatorSpec(kind, theta)
        close(apply(op, x, 1024, 1024).dense(), fast_apply(op, x, 1024, 1024).dense(), 1e-10)


def test_fast_apply_identity_case():
    r = fast_apply(OperatorSpec.hankel(DELTA), basis_element(1), 1, 4)
    np.testing.assert_array_equal(r.dense(), [1, 0, 0, 0])
    r = fast_apply(OperatorSpec.toeplitz(DELTA), FiniteSupport.from_dense(np.ones(200)), 200, 200)
    close(r.dense(), np.ones(200))


def test_fast_apply_needs_finite_support():
    with pytest.raises(TypeError):
        fast_apply(OperatorSpec.hankel(DELTA), parse_symbol("gauss").coords, 10, 10)


# -- shifts and Cesàro means -----------------------------------------------------------

def test_shift_examples():
    x = FiniteSupport.from_dense([1.0, 2.0, 3.0])
    close(shift("backward", x).values(IDX[:3]), [2, 3, 0])
    assert len(shift("forward", shift("backward", basis_element(1)))) == 0


@given(elements)
def test_backward_inverts_forward(x):
    np.testing.assert_array_equal(shift("backward", shift("forward", x)).values(IDX), x.values(IDX))


def test_iterated_shift_identity_examples():
    g = parse_symbol("geom:0.36787944117144233")
    for n in (0, 5):
        rep = iterated_shift_vs_column(g, n, probe=100)
        assert rep.holds
    theta = symbol_from([1, 2, 3])
    rep = iterated_shift_vs_column(theta, 2, probe=10)
    assert rep.holds
    close(hankel_column(theta, 3).values(IDX[:3]), [3, 0, 0])


@given(symbols, st.integers(0, 40))
def test_iterated_shift_identity_property(theta, n):
    assert iterated_shift_vs_column(theta, n, probe=64).holds


def test_cesaro_single_term_is_the_shift():
    g = parse_symbol("gauss")
    for kind in ("backward", "forward"):
        np.testing.assert_array_equal(cesaro_mean(kind, g, 1).values(IDX),
                                      shift(kind, g.coords).values(IDX))


def test_cesaro_forward_delta():
    # F e_1 = e_2 and F^2 e_1 = e_3
    m = cesaro_mean("forward", DELTA, 2)
    close(m.values(IDX[:5]), [0, 0.5, 0.5, 0, 0])


def test_cesaro_backward_paths_agree():
    theta = parse_symbol("geom:0.36787944117144233")
    ident = cesaro_mean("backward", theta, 4, probe=64).values(IDX)
    direct = cesaro_mean("backward", theta, 4, method="direct", probe=64).values(IDX)
    via_apply = apply(OperatorSpec.hankel(theta), FiniteSupport([2, 3, 4, 5], [0.25] * 4), 5,
                      64).dense()
    manual = np.mean([theta.values(IDX - 1 + m) for m in range(1, 5)], axis=0)
    close(ident, direct)
    close(ident, via_apply)
    close(ident, manual)


@given(symbols, st.integers(1, 50), st.sampled_from(["backward", "forward"]))
def test_cesaro_identity_matches_direct(theta, n, kind):
    a = cesaro_mean(kind, theta, n).values(IDX)
    b = cesaro_mean(kind, theta, n, method="direct", probe=64).values(IDX)
    scale = np.max(np.abs(theta.values(np.arange(0, 200))))
    assert np.max(np.abs(a - b)) <= 1e-12 * max(scale, 1e-300)


def test_cesaro_vector():
    v = cesaro_vector(3)
    assert v.indices.tolist() == [2, 3, 4]
    close(v.values(v.indices), [1 / 3] * 3)
    with pytest.raises(ValueError):
        cesaro_vector(0)


def test_operator_spec_validation():
    with pytest.raises(ValueError):
        OperatorSpec("hankel")
    with pytest.raises(ValueError):
        OperatorSpec("forward", DELTA)
