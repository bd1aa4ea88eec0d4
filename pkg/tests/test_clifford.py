import numpy as np
import pytest
from hypothesis import given, strategies as st

from majorana_ent import matrix_rep as mr
from majorana_ent.clifford import (
    CliffordElement,
    Parity,
    anticommutator,
    complex_fermion_modes,
    even_part,
    format_element,
    generator,
    generators,
    identity,
    mask_from_modes,
    modes_from_mask,
    monomial,
    mul,
    odd_part,
    omega,
    parity,
    parse_element,
    reorder_sign,
    scalar,
    star,
    theta,
)
from conftest import element_pairs, elements


def c(n, *modes):
    return monomial(n, mask_from_modes(modes))


def test_monomial_identity_and_products():
    assert monomial(2, 0) == identity(2)
    m = c(2, 1, 2)
    assert dict(m.terms) == {0b11: 1}
    assert dict(c(3, 1, 3).terms) == {0b101: 1}


def test_monomial_rejects_mask_outside_modes():
    with pytest.raises(ValueError):
        monomial(2, 0b100)


def test_generator_squares_to_one():
    assert mul(generator(2, 1), generator(2, 1)) == identity(2)


def test_swap_gives_minus_sign():
    assert mul(generator(2, 2), generator(2, 1)) == -c(2, 1, 2)


def test_three_mode_product_against_matrix_oracle():
    lhs = mul(c(3, 1, 3), generator(3, 2))
    assert lhs == -c(3, 1, 2, 3)
    rep = mr.build_irrep(3)
    m = mr.represent(c(3, 1, 3), rep) @ mr.represent(generator(3, 2), rep)
    assert np.allclose(m, -mr.represent(c(3, 1, 2, 3), rep))


def test_mul_mode_mismatch():
    with pytest.raises(ValueError):
        mul(generator(2, 1), generator(3, 1))


def test_star_examples():
    assert star(generator(2, 1)) == generator(2, 1)
    assert star(scalar(2, 1j)) == scalar(2, -1j)
    assert star(c(2, 1, 2)) == -c(2, 1, 2)
    rep = mr.build_irrep(2)
    assert np.allclose(mr.represent(star(c(2, 1, 2)), rep), mr.represent(c(2, 1, 2), rep).conj().T)


def test_omega_examples():
    assert omega(identity(2)) == 1
    assert omega(c(2, 1, 2)) == 0
    assert omega(3 * identity(2) + (2 + 1j) * generator(2, 1)) == 3


def test_grading_examples():
    assert theta(generator(2, 1)) == -generator(2, 1)
    assert theta(c(2, 1, 2)) == c(2, 1, 2)
    a = identity(2) + generator(2, 1) + c(2, 1, 2)
    assert even_part(a) == identity(2) + c(2, 1, 2)
    assert odd_part(a) == generator(2, 1)
    assert parity(a) is Parity.MIXED
    assert parity(CliffordElement(2)) is Parity.EVEN


def test_complex_fermion_modes_car():
    (a, ad), = complex_fermion_modes(2)
    assert a == (generator(2, 1) + 1j * generator(2, 2)) * 0.5
    assert star(a) == ad
    assert anticommutator(a, star(a)) == identity(2)
    assert mul(a, a).is_zero()


def test_complex_fermion_modes_four_modes_car():
    modes = complex_fermion_modes(4)
    for i, (a, _) in enumerate(modes):
        for j, (b, _) in enumerate(modes):
            assert anticommutator(a, star(b)).isclose(identity(4) if i == j else CliffordElement(4))
            assert anticommutator(a, b).is_zero()


def test_complex_fermion_modes_odd_rejected():
    with pytest.raises(ValueError):
        complex_fermion_modes(3)


def test_mode_cap():
    with pytest.raises(ValueError):
        identity(25)
    with pytest.raises(ValueError):
        identity(0)


def test_reorder_sign_counts_inversions():
    # c3 . c1c2 needs two swaps, c2 . c1 one
    assert reorder_sign(0b100, 0b011) == 1
    assert reorder_sign(0b010, 0b001) == -1


def test_mask_conversion_round_trip():
    assert modes_from_mask(mask_from_modes([1, 4, 7])) == (1, 4, 7)
    with pytest.raises(ValueError):
        mask_from_modes([0])


def test_format_and_parse():
    a = CliffordElement(2, {0b11: 1j, 0: 3})
    text = format_element(a)
    assert text == "(3,0) 1 + (0,1) c1c2"
    assert parse_element(2, text) == a
    assert parse_element(2, "c2c1") == -c(2, 1, 2)
    assert parse_element(3, "1 + 2i c1c3 - c2") == identity(3) + 2j * c(3, 1, 3) - generator(3, 2)
    assert format_element(CliffordElement(2)) == "0"
    with pytest.raises(ValueError):
        parse_element(2, "c1 c9")
    with pytest.raises(ValueError):
        parse_element(2, "")


def test_elements_are_immutable():
    a = generator(2, 1)
    with pytest.raises(AttributeError):
        a.foo = 1


@given(st.integers(1, 8))
def test_anticommutation_exact(n):
    gens = generators(n)
    for i, a in enumerate(gens):
        for j, b in enumerate(gens):
            s = anticommutator(a, b)
            assert s == (2 * identity(n) if i == j else CliffordElement(n))


@given(element_pairs(count=3))
def test_associativity(t):
    a, b, cc = t
    assert mul(mul(a, b), cc).isclose(mul(a, mul(b, cc)), 1e-12 * 100)


@given(elements())
def test_star_involution(a):
    assert star(star(a)) == a


@given(element_pairs())
def test_star_antihomomorphism(t):
    a, b = t
    assert star(mul(a, b)).isclose(mul(star(b), star(a)), 1e-9)


@given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2**n - 1))))
def test_monomials_unitary(t):
    n, m = t
    assert mul(star(monomial(n, m)), monomial(n, m)) == identity(n)


@given(elements())
def test_omega_positive(a):
    v = omega(mul(star(a), a))
    assert abs(v.imag) <= 1e-9
    assert v.real >= -1e-12


@given(element_pairs())
def test_grading_of_products(t):
    a, b = t
    ao, ae = odd_part(a), even_part(a)
    bo = odd_part(b)
    if not mul(ao, bo).is_zero():
        assert parity(mul(ao, bo)) is Parity.EVEN
    if not mul(ae, bo).is_zero():
        assert parity(mul(ae, bo)) is Parity.ODD


@given(elements())
def test_omega_theta_invariant(a):
    assert omega(theta(a)) == omega(a)


@given(elements())
def test_format_parse_round_trip(a):
    assert parse_element(a.n_modes, format_element(a)).isclose(a, 1e-9)
