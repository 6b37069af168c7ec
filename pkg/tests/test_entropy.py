import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entassist.channels import (
    apply_on_subsystem,
    identity_channel,
    make_depolarizing,
    make_mub_qc,
    make_transpose_depolarizing,
    make_two_pauli,
    standard_mub,
)
from entassist.entropy import (
    Ensemble,
    coherent_information,
    conditional_entropy,
    dary_symmetric_capacity,
    holevo_of_ensemble,
    majorizes,
    matrix_entropy,
    mub_uncertainty_check,
    mutual_information,
    output_entropy,
    s_min_analytic,
    s_min_numeric,
    shannon,
    von_neumann,
)
from entassist.qcore import (
    DensityMatrix,
    StateError,
    eig_hermitian,
    ket,
    max_entangled,
    partial_trace,
    product_state,
    projector,
    pure_state,
    random_density,
    random_pure,
    random_separable,
    tensor,
    werner_state,
)

H_THIRDS = 0.9182958340544896  # H(1/3, 2/3)


def test_shannon_basics():
    assert shannon([1.0]) == 0
    assert np.isclose(shannon([0.5, 0.5]), 1)
    assert np.isclose(shannon([1 / 3, 2 / 3]), H_THIRDS)
    assert shannon([1.0, 1e-13]) == 0
    with pytest.raises(ValueError):
        shannon([1.5, -0.5])


def test_von_neumann_examples():
    rng = np.random.default_rng(0)
    assert np.isclose(von_neumann(pure_state(random_pure(3, rng))), 0, atol=1e-9)
    for d in (2, 3, 5):
        assert np.isclose(von_neumann(DensityMatrix(np.eye(d) / d, (d,))), np.log2(d))


def test_werner_quarter_entropy():
    # spectrum (3/4, 1/12, 1/12, 1/12)
    expected = -(0.75 * np.log2(0.75) + 3 * (1 / 12) * np.log2(1 / 12))
    assert np.isclose(expected, 1.207518749639422, atol=1e-12)
    assert np.isclose(von_neumann(werner_state(0.25)), expected, atol=1e-12)


def test_clipping_policy():
    assert matrix_entropy(np.diag([1.0, -5e-11])) == 0
    with pytest.raises(StateError):
        matrix_entropy(np.diag([1.1, -1e-3]))


def test_conditional_entropy_examples():
    assert np.isclose(conditional_entropy(max_entangled(2), 0, 1), -1)
    rng = np.random.default_rng(1)
    a = DensityMatrix(random_density(2, rng), (2,))
    b = DensityMatrix(random_density(3, rng), (3,))
    assert np.isclose(conditional_entropy(product_state(a, b), 0, 1), von_neumann(a))
    omega = apply_on_subsystem(make_depolarizing(2, -1 / 3), werner_state(0.25), 0)
    assert conditional_entropy(omega, 0, 1) < H_THIRDS


def test_coherent_information_examples():
    assert np.isclose(coherent_information(max_entangled(2)), 1)
    assert np.isclose(coherent_information(werner_state(0.25)), 1 - 1.207518749639422, atol=1e-12)
    assert coherent_information(werner_state(0.25)) <= 0
    rng = np.random.default_rng(2)
    prod = product_state(pure_state(random_pure(2, rng)), pure_state(random_pure(2, rng)))
    assert np.isclose(coherent_information(prod), 0, atol=1e-9)


def test_mutual_information_examples():
    rng = np.random.default_rng(3)
    prod = product_state(DensityMatrix(random_density(2, rng), (2,)), DensityMatrix(random_density(2, rng), (2,)))
    assert np.isclose(mutual_information(prod, 0, 1), 0, atol=1e-9)
    assert np.isclose(mutual_information(max_entangled(2), 0, 1), 2)
    classical = DensityMatrix(np.diag([0.5, 0, 0, 0.5]), (2, 2))
    assert np.isclose(mutual_information(classical, 0, 1), 1)


def test_holevo_examples():
    rng = np.random.default_rng(4)
    single = Ensemble((1.0,), (DensityMatrix(random_density(2, rng), (2,)),))
    assert np.isclose(holevo_of_ensemble(single, make_two_pauli(0.3)), 0, atol=1e-12)
    orth = Ensemble((0.5, 0.5), (pure_state(ket(0, 2)), pure_state(ket(1, 2))))
    assert np.isclose(holevo_of_ensemble(orth, identity_channel(2)), 1)
    with pytest.raises(ValueError):
        Ensemble((0.5, 0.6), (pure_state(ket(0, 2)), pure_state(ket(1, 2))))


def test_s_min_analytic_values():
    assert np.isclose(s_min_analytic("depolarizing", 2, -1 / 3).value, H_THIRDS)
    assert np.isclose(s_min_analytic("two_pauli", 2, 1 / 3).value, H_THIRDS)
    assert np.isclose(s_min_analytic("transpose_depolarizing", 2, 1 / 3).value, H_THIRDS)
    for d in (2, 3, 7):
        assert s_min_analytic("depolarizing", d, 1.0).value == 0
    with pytest.raises(ValueError):
        s_min_analytic("amplitude_damping", 2, 0.3)


@pytest.mark.parametrize("ch", [identity_channel(2), make_mub_qc(standard_mub(3), 1)],
                         ids=["identity", "mub_qc"])
def test_s_min_numeric_zero(ch):
    res = s_min_numeric(ch, restarts=16)
    assert res.value < 1e-6 and res.method == "multistart"


def test_s_min_numeric_matches_analytic_on_named_channels():
    cases = [("depolarizing", 2, t, make_depolarizing(2, t)) for t in (-1 / 3, 0.0, 0.4)]
    cases += [("transpose_depolarizing", 2, t, make_transpose_depolarizing(2, t)) for t in (-0.5, 0.1, 1 / 3)]
    cases += [("two_pauli", 2, t, make_two_pauli(t)) for t in (0.1, 1 / 3, 0.6, 0.9)]
    for kind, d, t, ch in cases:
        exact = s_min_analytic(kind, d, t).value
        num = s_min_numeric(ch, restarts=16, seed=1)
        assert abs(num.value - exact) < 1e-6, (kind, t)


def test_s_min_numeric_never_below_any_sample():
    rng = np.random.default_rng(5)
    ch = make_two_pauli(0.7)
    best = s_min_numeric(ch, restarts=16).value
    for _ in range(200):
        assert output_entropy(ch, random_pure(2, rng)) >= best - 1e-9


def test_dary_symmetric_capacity():
    for d in (2, 5, 16, 64):
        assert dary_symmetric_capacity(d, 1.0) == pytest.approx(np.log2(d), abs=1e-12)
        off = 1 / (2 * d)
        direct = np.log2(d) - shannon([off] * (d - 1) + [0.5 + off])
        assert np.isclose(dary_symmetric_capacity(d, 0.0), direct)
        assert dary_symmetric_capacity(d, 0.0) > 0
    assert np.isclose(dary_symmetric_capacity(2, 1.0), 1)
    with pytest.raises(ValueError):
        dary_symmetric_capacity(4, 1.2)


def test_dary_capacity_huge_d():
    # every scattered entry is far below any entropy floor, yet together they carry
    # (1-δ)/2 · log2 d bits of noise
    for k in (40, 64, 2000):
        for delta in (0.0, 0.5, 0.9):
            rate = dary_symmetric_capacity(2 ** k, delta) / k
            assert abs(rate - (1 + delta) / 2) < 2 / k
            assert (1 + delta) / 2 * k - 1 <= dary_symmetric_capacity(2 ** k, delta)


def test_dary_bound_grid():
    for d in range(2, 65):
        for delta in np.linspace(0, 1, 11):
            assert (1 + delta) / 2 * np.log2(d) - 1 <= dary_symmetric_capacity(d, delta) + 1e-12


def test_majorization_examples():
    assert majorizes([1, 0], [0.5, 0.5])
    assert not majorizes([0.5, 0.5], [1, 0])
    assert majorizes([1], [0.25, 0.25, 0.25, 0.25])


def test_separable_marginals_majorize_global():
    rng = np.random.default_rng(6)
    for _ in range(300):
        rho = random_separable((2, 3), rng)
        lam = eig_hermitian(rho.matrix)
        assert majorizes(eig_hermitian(partial_trace(rho, [0]).matrix), lam, tol=1e-9)
        assert majorizes(eig_hermitian(partial_trace(rho, [1]).matrix), lam, tol=1e-9)


def test_mub_uncertainty_examples():
    for d in (2, 3, 4):
        pair = standard_mub(d)
        h0, h1, bound = mub_uncertainty_check(pair, pair.basis0[:, 0])
        assert np.isclose(h0, 0) and np.isclose(h1, np.log2(d))
        # an unbiased-looking superposition still satisfies the bound
        h0, h1, bound = mub_uncertainty_check(pair, np.ones(d) + 1j * np.arange(d))
        assert h0 + h1 >= bound - 1e-9
    pair = standard_mub(3)
    rng = np.random.default_rng(7)
    for _ in range(1000):
        h0, h1, bound = mub_uncertainty_check(pair, random_pure(3, rng))
        assert h0 + h1 >= bound - 1e-9


# --- properties -------------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(d=st.integers(2, 5), seed=st.integers(0, 2**32 - 1))
def test_entropy_unitary_invariance(d, seed):
    rng = np.random.default_rng(seed)
    rho = random_density(d, rng)
    u, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    assert np.isclose(matrix_entropy(rho), matrix_entropy(u @ rho @ u.conj().T), atol=1e-9)


def test_conditional_entropy_concavity():
    rng = np.random.default_rng(8)
    for _ in range(500):
        a, b = random_density(4, rng), random_density(4, rng)
        p = rng.random()
        mix = DensityMatrix.trusted(p * a + (1 - p) * b, (2, 2))
        lhs = conditional_entropy(mix, 0, 1)
        rhs = (p * conditional_entropy(DensityMatrix.trusted(a, (2, 2)), 0, 1)
               + (1 - p) * conditional_entropy(DensityMatrix.trusted(b, (2, 2)), 0, 1))
        assert lhs >= rhs - 1e-9


@pytest.mark.parametrize("make", [lambda: make_depolarizing(2, -1 / 3), lambda: make_transpose_depolarizing(2, 1 / 3),
                                  lambda: make_two_pauli(1 / 3), lambda: make_two_pauli(0.8)],
                         ids=["depolarizing", "transpose_depolarizing", "two_pauli", "two_pauli_0.8"])
def test_product_inputs_respect_s_min(make):
    ch = make()
    smin = s_min_numeric(ch, restarts=16)
    rng = np.random.default_rng(9)
    for _ in range(1000):
        prod = pure_state(tensor(random_pure(2, rng), random_pure(2, rng)), (2, 2))
        omega = apply_on_subsystem(ch, prod, 0)
        assert conditional_entropy(omega, 0, 1) >= smin.value - 1e-9
    attained = pure_state(tensor(smin.argmin, random_pure(2, rng)), (2, 2))
    s = conditional_entropy(apply_on_subsystem(ch, attained, 0), 0, 1)
    assert abs(s - smin.value) < 1e-9
    assert np.isclose(projector(smin.argmin).trace().real, 1)
