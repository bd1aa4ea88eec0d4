import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from majorana_ent import gns, metrology as mt, rep_decomp as rd, separability as sp
from majorana_ent.clifford import CliffordElement, commutator, generator, identity, mask_from_modes, monomial, mul, star
from majorana_ent.gns import GnsVector

W12 = mt.SpectralFunction.explicit([1, 2])


def c(n, *modes):
    return monomial(n, mask_from_modes(modes))


def test_generator_examples():
    assert mt.generator_balanced(2, mt.SpectralFunction(0)) == 1j * c(2, 1, 2)
    assert mt.generator_balanced(4, W12) == 1j * (c(4, 1, 3) + 2 * c(4, 2, 4))
    assert mt.generator_local(4, W12) == 1j * (c(4, 1, 2) + 2 * c(4, 3, 4))
    for n in (2, 4, 6, 8):
        for p in (0, 1, 2):
            w = mt.SpectralFunction(p)
            assert star(mt.generator_balanced(n, w)) == mt.generator_balanced(n, w)
            assert star(mt.generator_local(n, w)) == mt.generator_local(n, w)
    with pytest.raises(ValueError):
        mt.generator_local(3, W12)


def test_spectral_function():
    assert np.array_equal(mt.SpectralFunction(2).evaluate(3), [1, 4, 9])
    with pytest.raises(ValueError):
        W12.evaluate(3)
    with pytest.raises(ValueError):
        mt.SpectralFunction(-1)


def test_local_pair_terms_commute_and_factorise():
    n = 4
    terms = mt.local_pair_terms(n, W12)
    assert commutator(c(4, 1, 2), c(4, 3, 4)).is_zero()
    rep = gns.build_gns(n)
    theta = 0.37
    full = mt.unitary(rep, mt.generator_local(n, W12), theta)
    prod = np.eye(rep.dim)
    for t in terms:
        prod = prod @ mt.unitary(rep, t, theta)
    assert np.max(np.abs(full - prod)) <= 1e-10


def test_probe_psi():
    psi = mt.probe_psi(4)
    assert psi.is_normalized()
    one = identity(4)
    x = mul(one + 1j * c(4, 1, 2), one - 1j * c(4, 3, 4)) / 2
    assert psi.isclose(GnsVector.from_element(x))
    rep = gns.build_gns(4)
    assert sp.pure_factorization_test(rep, psi, sp.Bipartition.balanced(4)).verdict is sp.Verdict.SEPARABLE
    assert abs(gns.expectation(rep, psi, 1j * c(4, 1, 2)) - 1) < 1e-12
    with pytest.raises(ValueError):
        mt.probe_psi(6)


def test_probe_phi():
    phi = mt.probe_phi(4, 0b0001, 0b0100)
    assert phi.isclose(GnsVector.from_element((identity(4) + 1j * c(4, 1, 3)) / math.sqrt(2)))
    rep = gns.build_gns(4)
    assert abs(gns.expectation(rep, phi, c(4, 1, 3)) + 1j) < 1e-12
    assert sp.odd_odd_witness(rep, phi, sp.Bipartition.balanced(4)) is not None
    with pytest.raises(ValueError):
        mt.probe_phi(4, 0b0011, 0b1100)
    with pytest.raises(ValueError):
        mt.probe_phi(4, 0b0100, 0b0001)
    # three-mode gammas on eight modes
    assert mt.probe_phi(8, 0b0111, 0b01110000).is_normalized()


def test_evolve():
    rep = gns.build_gns(2)
    j = 1j * c(2, 1, 2)
    v = GnsVector(2, {0: 0.6, 1: 0.8j})
    assert mt.evolve(rep, v, j, 0.0).isclose(v)
    out = mt.evolve(rep, v, j, math.pi)
    overlap = v.inner(out)
    assert abs(abs(overlap) - 1) < 1e-10
    assert abs(mt.evolve(rep, v, j, 0.9).norm_sq() - 1) < 1e-10
    with pytest.raises(ValueError):
        mt.evolve(rep, v, c(2, 1, 2), 0.1)


def test_qfi_closed_forms_four_modes():
    rep = gns.build_gns(4)
    r = mt.qfi_pure(rep, mt.probe_psi(4), mt.generator_balanced(4, W12))
    assert r.variance == pytest.approx(9, abs=1e-10)
    assert r.qfi_4var == 4 * r.variance
    r = mt.qfi_pure(rep, mt.default_phi(4), mt.generator_local(4, W12))
    assert r.variance == pytest.approx(5, abs=1e-10)


def test_dense_oracle_variance():
    # direct numpy evaluation of <J^2> - <J>^2
    rep = gns.build_gns(4)
    j = rep.matrix(mt.generator_balanced(4, W12))
    v = mt.probe_psi(4).to_dense()
    m = v.conj() @ j @ v
    assert (v.conj() @ j @ j @ v - m * m).real == pytest.approx(9)


def test_local_generator_variances_on_bases():
    w = mt.SpectralFunction(1)
    for n in (4, 8):
        rep = gns.build_gns(n)
        j = mt.generator_local(n, w)
        f = rd.f_basis(n)
        for v in f.flat():
            assert mt.qfi_pure(rep, GnsVector.from_dense(n, v), j).variance == pytest.approx(0, abs=1e-10)
        # e-basis vectors carry the full local variance
        e = rd.e_basis(n)
        expect = mt.closed_form_local_phi(n, w)
        for v in e.flat()[:4]:
            assert mt.qfi_pure(rep, GnsVector.from_dense(n, v), j).variance == pytest.approx(expect)


def test_qfi_rejects_bad_input():
    rep = gns.build_gns(2)
    with pytest.raises(ValueError):
        mt.qfi_pure(rep, GnsVector(2, {0: 2}), 1j * c(2, 1, 2))
    with pytest.raises(ValueError):
        mt.qfi_pure(rep, rep.cyclic_vector, c(2, 1, 2))


def test_sld_qfi_reductions():
    g = np.random.default_rng(4)
    j = g.normal(size=(4, 4)) + 1j * g.normal(size=(4, 4))
    j = j + j.conj().T
    v = g.normal(size=4) + 1j * g.normal(size=4)
    v /= np.linalg.norm(v)
    var = (v.conj() @ j @ j @ v - (v.conj() @ j @ v) ** 2).real
    assert mt.sld_qfi(np.outer(v, v.conj()), j) == pytest.approx(4 * var, abs=1e-8)
    assert mt.sld_qfi(np.eye(4) / 4, j) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        mt.sld_qfi(np.diag([1.5, -0.5]), np.eye(2))


def test_restricted_qfi_matches_full_space():
    rep = gns.build_gns(4)
    f = rd.f_basis(4)
    for probe, j in ((mt.default_phi(4), mt.generator_local(4, W12)), (mt.probe_psi(4), mt.generator_balanced(4, W12))):
        s = gns.restrict(rep, probe, f)
        assert mt.qfi_restricted(rep, s, j) == pytest.approx(mt.qfi_pure(rep, probe, j).qfi_4var, abs=1e-8)


def test_closed_form_agreement_eight_modes():
    w = mt.SpectralFunction(1)
    rep = gns.build_gns(8)
    r = mt.qfi_pure(rep, mt.probe_psi(8), mt.generator_balanced(8, w))
    assert r.variance == pytest.approx(mt.closed_form_balanced_psi(8, w), abs=1e-8)
    assert mt.closed_form_balanced_psi(8, w) == (1 + 2) ** 2 + (3 + 4) ** 2
    r = mt.qfi_pure(rep, mt.default_phi(8), mt.generator_local(8, w))
    assert r.variance == pytest.approx(1 + 4 + 9 + 16, abs=1e-8)
    assert r.qfi_4var > 8


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_phase_encoding_derivative(seed):
    g = np.random.default_rng(seed)
    n = 4
    rep = gns.build_gns(n)
    j = mt.generator_balanced(n, W12)
    a = CliffordElement(n, {int(m): complex(*g.normal(size=2)) for m in g.choice(16, 4, replace=False)})
    psi = GnsVector.from_dense(n, g.normal(size=16) + 1j * g.normal(size=16)).normalized()
    h = 1e-4

    def ev(t):
        v = mt.evolve(rep, psi, j, t).to_dense()
        return v.conj() @ rep.matrix(a) @ v

    deriv = (ev(h) - ev(-h)) / (2 * h)
    comm = commutator(a, j)
    expect = 1j * (psi.to_dense().conj() @ rep.matrix(comm) @ psi.to_dense())
    assert abs(deriv - expect) <= 1e-6


@given(st.sampled_from([4, 8]), st.sampled_from(["balanced", "local"]), st.sampled_from(["psi", "phi"]))
def test_mean_real_and_variance_nonnegative(n, kind, probe):
    r = mt.matrix_report(kind, probe, n, mt.SpectralFunction(1))
    assert r.variance >= -1e-10
    assert abs(r.mean) < 1e9


def test_sweep_rows_and_csv():
    res = mt.sweep([8, 16, 32], "local", 0, "phi")
    assert [r.closed_form for r in res.rows] == [4, 8, 16]
    assert res.exponent == pytest.approx(1, abs=1e-12)
    text = res.to_csv()
    lines = text.splitlines()
    assert lines[0] == "N,variance,qfi4,closed_form,shot_noise,heisenberg"
    assert lines[1] == "8,4,16,4,8,64"
    assert lines[-1].startswith("# exponent=1 r2=1")
    assert res.rows[0].matrix_checked and not res.rows[1].matrix_checked


def test_sweep_validation():
    with pytest.raises(ValueError):
        mt.sweep([])
    with pytest.raises(ValueError):
        mt.sweep([6, 8], "balanced", 1, "psi")
    with pytest.raises(ValueError):
        mt.sweep([8, 16], "balanced", 1, "phi")
    with pytest.raises(ValueError):
        mt.fit_exponent([8], [1.0])


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv(mt.THREADS_ENV, "3")
    assert mt.thread_count() == 3
    monkeypatch.setenv(mt.THREADS_ENV, "x")
    with pytest.raises(ValueError):
        mt.thread_count()


def test_report_dict_keys():
    r = mt.matrix_report("balanced", "psi", 4, W12)
    assert list(r.to_dict()) == [
        "modes", "generator", "state", "mean", "variance", "qfi_4var", "closed_form", "shot_noise", "heisenberg",
    ]
    assert r.shot_noise_ref == 4 and r.heisenberg_ref == 16
