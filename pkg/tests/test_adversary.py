import csv
import io
import math

import numpy as np
import pytest

from qdkd import adversary as adv
from qdkd import quantum as qm
from qdkd.quantum import Operator, QuantumState

from oracles import (
    H,
    PSI_MINUS,
    PSI_PLUS,
    attack_closed_form,
    final_states_dense,
    intercept_resend_p_corr,
    rotation_matrix_dense,
)

SHIPPED = [
    adv.make_attack("identity"),
    adv.make_attack("intercept-resend", basis="Z"),
    adv.make_attack("intercept-resend", basis="X"),
    adv.make_attack("rotation", theta=0.4),
    adv.make_attack("rotation", theta=0.2, theta_one=1.1),
    adv.make_attack("random-unitary", seed=5, ancilla_dim=1),
    adv.make_attack("random-unitary", seed=6, ancilla_dim=4),
]


def dense(attack):
    return attack.J.matrix, attack.K.matrix, attack.initial_ancilla.data


class TestConstructors:
    def test_unitarity(self):
        for attack in SHIPPED:
            for m in (attack.J.matrix, attack.K.matrix):
                assert np.max(np.abs(m @ m.conj().T - np.eye(len(m)))) < 1e-10

    def test_rotation_matches_dense_oracle(self):
        a = adv.make_attack("rotation", theta=0.3, theta_one=0.9)
        np.testing.assert_allclose(a.J.matrix, rotation_matrix_dense(0.3, 0.9), atol=1e-15)

    def test_rotation_zero_is_identity(self):
        ident = adv.evaluate_attack(adv.make_attack("identity"))
        rot = adv.evaluate_attack(adv.make_attack("rotation", theta=0.0))
        for field in ("p_corr", "q", "chi_eve_bob", "chi_eve_alice"):
            assert getattr(rot, field) == pytest.approx(getattr(ident, field), abs=1e-12)

    @pytest.mark.parametrize("theta", [-0.1, math.pi, float("nan")])
    def test_invalid_theta(self, theta):
        with pytest.raises(ValueError):
            adv.make_attack("rotation", theta=theta)

    def test_invalid_family_and_dims(self):
        with pytest.raises(ValueError):
            adv.make_attack("teleport")
        with pytest.raises(ValueError):
            adv.make_attack("random-unitary", seed=0, ancilla_dim=17)
        with pytest.raises(ValueError):
            adv.make_attack("intercept-resend", basis="Y")

    def test_model_validation(self):
        e = qm.basis_state(qm.ancilla(2), 0)
        with pytest.raises(ValueError):
            adv.AttackModel(e, Operator((qm.B, qm.ancilla(2)), np.eye(4)), Operator((qm.B, qm.ancilla(2)), np.eye(4)))
        with pytest.raises(ValueError):
            adv.AttackModel(
                e,
                Operator((qm.B, qm.ancilla(3)), np.eye(6), unitary=True),
                Operator((qm.B, qm.ancilla(3)), np.eye(6), unitary=True),
            )

    def test_random_is_seeded(self):
        a = adv.make_attack("random-unitary", seed=11, ancilla_dim=2)
        b = adv.make_attack("random-unitary", seed=11, ancilla_dim=2)
        np.testing.assert_array_equal(a.J.matrix, b.J.matrix)
        np.testing.assert_array_equal(a.initial_ancilla.data, b.initial_ancilla.data)


class TestFinalStates:
    def test_identity_attack(self):
        st = adv.final_states(adv.make_attack("identity"))
        np.testing.assert_allclose(st.mu_plus.data, PSI_PLUS, atol=1e-15)
        np.testing.assert_allclose(st.mu_minus.data, PSI_MINUS, atol=1e-15)
        np.testing.assert_allclose(st.nu_minus.data, -PSI_PLUS, atol=1e-15)
        np.testing.assert_allclose(st.nu_plus.data, -PSI_MINUS, atol=1e-15)

    @pytest.mark.parametrize("attack", SHIPPED, ids=lambda a: a.kind)
    def test_matches_matrix_chain(self, attack):
        expected = final_states_dense(*dense(attack))
        got = adv.final_states(attack)
        for e, g in zip(expected, got):
            np.testing.assert_allclose(g.data, e, atol=1e-12)


class TestPcorr:
    def test_identity(self):
        a = adv.make_attack("identity")
        assert adv.p_corr_exact(a) == pytest.approx(0, abs=1e-15)
        st = adv.final_states(a)
        assert qm.inner(st.mu_plus, st.nu_minus) == pytest.approx(-1)
        assert adv.p_corr_overlap(a) == pytest.approx(0, abs=1e-15)

    @pytest.mark.parametrize("basis", ["Z", "X"])
    def test_intercept_resend_branch_enumeration(self, basis):
        expected = intercept_resend_p_corr(basis)
        assert expected == pytest.approx({"Z": 0.0, "X": 0.5}[basis], abs=1e-15)
        a = adv.make_attack("intercept-resend", basis=basis)
        assert adv.p_corr_exact(a) == pytest.approx(expected, abs=1e-12)
        assert adv.p_corr_overlap(a) == pytest.approx(expected, abs=1e-12)

    def test_overlap_midpoint(self):
        # a J that always flips B gives <mu+|nu-> = +1; half-flip gives 0
        a = adv.make_attack("rotation", theta=math.pi / 4)
        st = adv.final_states(a)
        assert qm.inner(st.mu_plus, st.nu_minus).real == pytest.approx(0, abs=1e-12)
        assert adv.p_corr_overlap(a) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("attack", SHIPPED, ids=lambda a: a.kind)
    def test_closed_form(self, attack):
        J, _, e = dense(attack)
        ref = attack_closed_form(J, e)
        assert adv.p_corr_exact(attack) == pytest.approx(ref["p_corr"], abs=1e-12)

    def test_random_attacks_agree(self):
        attacks = [adv.make_attack("random-unitary", seed=s, ancilla_dim=n) for s in range(60) for n in (1, 2, 4)]
        assert adv.check_p_corr_consistency(attacks) == []

    def test_discrepancy_report_is_structured(self):
        report = adv.check_p_corr_consistency([adv.make_attack("identity")], tol=-1.0)
        assert len(report) == 1
        assert report[0].attack["family"] == "identity"
        assert "J" in report[0].attack and report[0].gap < 1e-12


class TestQ:
    def test_identity(self):
        assert adv.q_overlap(adv.make_attack("identity")) == pytest.approx(0, abs=1e-15)

    def test_rotation_quarter_pi(self):
        a = adv.make_attack("rotation", theta=math.pi / 4)
        mu_p, _, nu_p, _ = final_states_dense(*dense(a))
        assert adv.q_overlap(a) == pytest.approx(np.vdot(mu_p, nu_p).real, abs=1e-12)

    @pytest.mark.parametrize("attack", SHIPPED, ids=lambda a: a.kind)
    def test_closed_form_and_realness(self, attack):
        J, _, e = dense(attack)
        out = adv.evaluate_attack(attack)
        assert out.q == pytest.approx(attack_closed_form(J, e)["q"], abs=1e-12)
        assert abs(out.q_imag) < 1e-12


class TestHolevo:
    def test_identity_is_zero(self):
        a = adv.make_attack("identity")
        assert adv.holevo_eve_bob(a) == pytest.approx(0, abs=1e-12)
        assert adv.holevo_eve_alice(a) == pytest.approx(0, abs=1e-12)

    def test_intercept_resend_x(self):
        a = adv.make_attack("intercept-resend", basis="X")
        chi = adv.holevo_eve_bob(a)
        assert 0 <= chi <= math.log2(2 * a.ancilla_dim) + 1e-9
        assert chi == pytest.approx(H(0.5), abs=1e-9)

    @pytest.mark.parametrize("attack", SHIPPED, ids=lambda a: a.kind)
    def test_closed_form(self, attack):
        J, _, e = dense(attack)
        ref = attack_closed_form(J, e)
        out = adv.evaluate_attack(attack)
        assert out.chi_eve_bob == pytest.approx(ref["chi_eve_bob"], abs=1e-9)
        assert out.chi_eve_alice == pytest.approx(ref["chi_eve_alice"], abs=1e-9)

    @pytest.mark.parametrize("theta", np.linspace(0, math.pi / 4, 9))
    def test_q_zero_identity(self, theta):
        out = adv.evaluate_attack(adv.make_attack("rotation", theta=theta))
        assert abs(out.q) < 1e-12
        assert out.chi_eve_bob == pytest.approx(H(out.p_corr), abs=1e-6)
        assert out.chi_eve_alice == pytest.approx(H(out.p_corr), abs=1e-6)

    def test_bounds_on_random_attacks(self):
        for seed in range(40):
            for n in (1, 2, 4):
                a = adv.make_attack("random-unitary", seed=seed, ancilla_dim=n)
                for chi in (adv.holevo_eve_bob(a), adv.holevo_eve_alice(a)):
                    assert -1e-9 <= chi <= 1 + 1e-9
                    assert chi <= math.log2(2 * n) + 1e-9

    def test_ancilla_only_is_weaker(self):
        for seed in range(10):
            a = adv.make_attack("random-unitary", seed=seed, ancilla_dim=2)
            assert adv.holevo_eve_bob(a, system="E") <= adv.holevo_eve_bob(a) + 1e-9
            assert adv.holevo_eve_alice(a, system="E") <= adv.holevo_eve_alice(a) + 1e-9
        with pytest.raises(ValueError):
            adv.holevo_eve_bob(SHIPPED[0], system="AB")

    def test_encoding_table(self):
        # Alice's bit selects the Bell input, Bob's bit selects the gate
        assert adv.ENCODING == {(0, 0): "mu_minus", (1, 0): "mu_plus", (0, 1): "nu_minus", (1, 1): "nu_plus"}


class TestRotationFamily:
    GRID = np.linspace(0, math.pi / 2, 1001)

    def test_continuity(self):
        p = [adv.p_corr_exact(adv.make_attack("rotation", theta=t)) for t in self.GRID]
        assert np.max(np.abs(np.diff(p))) < 0.01

    def test_detectability(self):
        for o in adv.rotation_sweep(self.GRID[1::10]):
            if o.chi_eve_bob > 1e-12:
                assert o.p_corr > 1e-12

    def test_asymmetric_leaves_q_zero_line(self):
        o = adv.evaluate_attack(adv.make_attack("rotation", theta=0.2, theta_one=0.8))
        assert o.q == pytest.approx(math.sin(0.8) ** 2 - math.sin(0.2) ** 2, abs=1e-12)


class TestSweepCsv:
    def test_columns_and_rows(self):
        text = adv.sweep_csv(adv.rotation_sweep([0.0, 0.5]))
        rows = list(csv.DictReader(io.StringIO(text)))
        assert list(rows[0]) == ["family", "params", "p_corr", "q", "chi_eve_bob", "chi_eve_alice"]
        assert float(rows[0]["p_corr"]) == 0.0
        assert float(rows[1]["p_corr"]) == pytest.approx(math.sin(0.5) ** 2, abs=1e-12)
