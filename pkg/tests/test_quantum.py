import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellkcbs.errors import DomainError, NumericError, StructuralError
from bellkcbs.inequalities import correlators_from_behavior, quantum_correlators
from bellkcbs.quantum import (
    alice_observable,
    alice_projectors,
    bob_observable,
    bob_projectors,
    commutator_norm,
    expectation,
    is_hermitian,
    joint_observable,
    kcbs_vector,
    maximally_mixed_behavior,
    product_ket,
    state_psi,
    QuantumModel,
)
from bellkcbs.scenario import PENTAGON, Scenario, marginalize_bob

I2, I3, I6 = np.eye(2), np.eye(3), np.eye(6)
angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def test_alice_observables_are_paulis():
    assert np.array_equal(alice_observable(0), np.diag([1, -1]))
    assert np.array_equal(alice_observable(1), np.array([[0, 1], [1, 0]]))
    for x in (0, 1):
        assert np.allclose(alice_observable(x) @ alice_observable(x), I2, atol=1e-15)
    with pytest.raises(DomainError):
        alice_observable(2)


def test_kcbs_vectors():
    for j in range(5):
        assert np.linalg.norm(kcbs_vector(j)) == pytest.approx(1, abs=1e-12)
        assert abs(np.vdot(kcbs_vector(j), kcbs_vector((j + 1) % 5))) < 1e-12
    c = 1 / math.sqrt(1 + math.cos(math.pi / 5))
    assert np.allclose(kcbs_vector(0), [c, 0, c * math.sqrt(math.cos(math.pi / 5))], atol=1e-15)
    assert abs(kcbs_vector(0)[2]) ** 2 == pytest.approx(math.cos(math.pi / 5) / (1 + math.cos(math.pi / 5)))
    for bad in (-1, 5, 1.5):
        with pytest.raises(DomainError):
            kcbs_vector(bad)


@pytest.mark.parametrize("j", range(5))
def test_bob_observable_spectrum(j):
    b = bob_observable(j)
    assert is_hermitian(b)
    assert np.allclose(b @ b, I3, atol=1e-12)
    # the eigenvalue (-1)^(j+1) is carried by v_j alone
    assert np.allclose(b @ kcbs_vector(j), (-1) ** (j + 1) * kcbs_vector(j), atol=1e-12)
    evals = np.sort(np.linalg.eigvalsh(b))
    expected = sorted([(-1) ** (j + 1)] + [(-1) ** j] * 2)
    assert np.allclose(evals, expected, atol=1e-10)


def test_compatibility_graph_is_the_pentagon():
    for j in range(5):
        assert commutator_norm(bob_observable(j), bob_observable((j + 1) % 5)) < 1e-12
    assert commutator_norm(bob_observable(0), bob_observable(2)) > 0.1
    for j in range(5):
        assert commutator_norm(bob_observable(j), bob_observable((j + 2) % 5)) > 0.1


@pytest.mark.parametrize("pair", [alice_projectors(0), alice_projectors(1)] + [bob_projectors(j) for j in range(5)])
def test_projector_pairs(pair):
    minus, plus = pair
    eye = np.eye(len(plus))
    assert np.allclose(plus + minus, eye, atol=1e-12)
    assert np.allclose(plus @ minus, 0, atol=1e-12)
    assert np.allclose(plus @ plus, plus, atol=1e-12)
    assert np.allclose(minus @ minus, minus, atol=1e-12)
    assert is_hermitian(plus) and is_hermitian(minus)


@pytest.mark.parametrize("j", range(5))
def test_projectors_reconstruct_observable(j):
    minus, plus = bob_projectors(j)
    assert np.allclose(plus - minus, bob_observable(j), atol=1e-12)


def test_state_endpoints():
    u, v = product_ket(1.1, 2), product_ket(0.3, 0)
    assert np.allclose(state_psi(0, 1.1, 0.3), u)
    assert np.allclose(state_psi(math.pi / 2, 1.1, 0.3), v, atol=1e-15)
    assert abs(np.vdot(u, v)) == 0
    # qubit-major ordering: |1>|2> sits at index 3*1+2
    assert np.allclose(product_ket(math.pi / 2, 2), np.eye(6)[5], atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(phi=angles, tu=angles, tv=angles)
def test_state_is_normalized(phi, tu, tv):
    assert np.linalg.norm(state_psi(phi, tu, tv)) == pytest.approx(1.0, abs=1e-12)


def test_expectation_contract():
    psi = state_psi(0.3)
    assert expectation(psi, I6) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(StructuralError):
        expectation(psi, I3)
    with pytest.raises(NumericError):
        expectation(psi, 1j * I6)


def test_expectation_values_at_default_angles():
    # the tabulated theory column for the phi=0 state
    assert QuantumModel(0.0).expect(0, (0,)) == pytest.approx(0.0904, abs=1e-3)
    assert QuantumModel(0.351).expect(None, (0, 1)) == pytest.approx(0.8120, abs=1e-3)


def test_tabulated_theory_needs_more_precise_angles():
    # The three-decimal angles miss <A1 B2 B3> at phi=0.351 by about 2e-3.
    # Slightly refined angles reproduce the tabulated -0.7483.
    assert QuantumModel(0.351).expect(1, (2, 3)) == pytest.approx(-0.7506, abs=2e-4)
    assert QuantumModel(0.351, 2.8702, 1.4494).expect(1, (2, 3)) == pytest.approx(-0.7483, abs=1e-3)


def test_noncommuting_context_rejected():
    from bellkcbs.quantum import _cell_operators

    with pytest.raises(DomainError):
        _cell_operators(0, (0, 2))


def test_model_rejects_non_finite():
    with pytest.raises(DomainError):
        QuantumModel(float("nan"))


@settings(max_examples=100, deadline=None)
@given(phi=angles, tu=angles, tv=angles)
def test_table_route_equals_operator_route(phi, tu, tv):
    model = QuantumModel(phi, tu, tv)
    b = model.behavior()
    from_tables = correlators_from_behavior(b)
    direct = quantum_correlators(model)
    for label, v in direct.as_labels().items():
        assert from_tables.get(label) == pytest.approx(v, abs=1e-12)
    # every Alice-Bob context, not only the four in the CHSH functional
    for (x, ctx), table in b.tables.items():
        signed = sum(
            math.prod(outs) * table[tuple((o + 1) // 2 for o in outs)]
            for outs in itertools.product((-1, 1), repeat=1 + len(ctx))
        )
        assert signed == pytest.approx(model.expect(x, ctx), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(phi=angles, tu=angles, tv=angles)
def test_alice_marginal_independent_of_bob_context(phi, tu, tv):
    b = QuantumModel(phi, tu, tv).behavior()
    for x in (0, 1):
        ref = b[(x, (0,))].sum(axis=1)
        for ctx in PENTAGON:
            assert np.allclose(b[(x, ctx)].reshape(2, -1).sum(axis=1), ref, atol=1e-12)


def test_maximally_mixed_oracle():
    # trace oracle: <B_j B_k> = Tr(B_j B_k) / 3 for the maximally mixed qutrit
    trace = {c: np.trace(bob_observable(c[0]) @ bob_observable(c[1])).real / 3 for c in PENTAGON}
    assert [round(trace[c], 12) for c in PENTAGON] == [round(1 / 3, 12)] * 4 + [round(-1 / 3, 12)]
    m = marginalize_bob(maximally_mixed_behavior(Scenario.default()))
    for c in PENTAGON:
        t = m[c]
        corr = t[0, 0] + t[1, 1] - t[0, 1] - t[1, 0]
        assert corr == pytest.approx(trace[c], abs=1e-12)


def test_joint_observable_layout():
    assert np.allclose(joint_observable(None, (0,)), np.kron(I2, bob_observable(0)))
    assert np.allclose(joint_observable(1, (2, 3)), np.kron(alice_observable(1), bob_observable(2) @ bob_observable(3)))
