import itertools

import numpy as np
import pytest

from qotsim import adversary, protocol, qsim
from qotsim.adversary import UeParams
from qotsim.protocol import ProtocolConfig, ProtocolError, Role, SequenceSlot
from qotsim.qsim import Basis, BellKind


def rng(seed=0):
    return np.random.default_rng(seed)


def decoy_slot(decoy_id, position=0):
    return SequenceSlot(position, Role.DECOY, protocol.DECOY_STATES[decoy_id],
                        decoy_id=decoy_id)


class TestInterceptResend:
    def test_per_decoy_detection_is_one_quarter(self):
        g = rng(1)
        n = 40_000
        hits = 0
        for _ in range(n):
            did = int(g.integers(4))
            attacked = adversary.eve_intercept_resend([decoy_slot(did)], g)[0]
            bit, _ = qsim.measure(attacked.state, protocol.decoy_basis(did), 0, g)
            hits += bit != protocol.decoy_bit(did)
        se = np.sqrt(0.25 * 0.75 / n)
        assert abs(hits / n - 0.25) <= 4 * se

    def test_no_decoys_no_detection(self):
        g = rng(2)
        slots = [SequenceSlot(0, Role.PAYLOAD, qsim.ZERO, choice=0)]
        attacked = adversary.eve_intercept_resend(slots, g)
        assert len(attacked) == 1  # payload disturbance is invisible to the check

    def test_resent_states_are_basis_eigenstates(self):
        g = rng(3)
        attacked = adversary.eve_intercept_resend([decoy_slot(2)], g)[0]
        eigen = [s.amps for s in protocol.DECOY_STATES]
        assert any(abs(abs(np.vdot(e, attacked.state.amps)) - 1) < 1e-10 for e in eigen)


def orthogonal_ancilla_params():
    """a=d=1, b=c=0 but e00 orthogonal to e11: leaks and disturbs X decoys."""
    e00 = np.array([1, 0, 0, 0], dtype=complex)
    e11 = np.array([0, 1, 0, 0], dtype=complex)
    return UeParams(1, 0, 0, 1, e00, e00.copy(), e00.copy(), e11)


class TestUeParams:
    def test_no_detection_point_is_valid(self):
        p = UeParams.no_detection_point()
        assert p.a == 1 and p.d == 1

    def test_rejects_unnormalized_amplitudes(self):
        e = np.array([1, 0, 0, 0], dtype=complex)
        with pytest.raises(ProtocolError):
            UeParams(1, 1, 0, 1, e, e, e, e)

    def test_rejects_non_unit_ancilla(self):
        e = np.array([1, 0, 0, 0], dtype=complex)
        with pytest.raises(ProtocolError):
            UeParams(1, 0, 0, 1, 2 * e, e, e, e)

    def test_rejects_isometry_violation(self):
        e = np.array([1, 0, 0, 0], dtype=complex)
        inv_sqrt2 = 1 / np.sqrt(2)
        # both images overlap on |0>e with equal weight: cross term 1/2
        with pytest.raises(ProtocolError):
            UeParams(inv_sqrt2, inv_sqrt2, inv_sqrt2, inv_sqrt2, e, e, e, e)

    def test_sampler_yields_valid_params(self):
        g = rng(5)
        for _ in range(50):
            p = adversary.sample_ue_params(g)
            assert 0.0 <= adversary.ue_detection_probability(p) <= 1.0
            assert 0.0 <= adversary.ue_leakage(p) <= 1.0 + 1e-12

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "ue.txt"
        path.write_text(
            "a = 1+0j\nb = 0j\nc = 0j\nd = 1+0j\n"
            "e00 = 1,0,0,0\ne01 = 1,0,0,0\ne10 = 0,1,0,0\ne11 = 1,0,0,0\n")
        p = adversary.load_ue_params(path)
        assert adversary.ue_detection_probability(p) == 0.0

    def test_file_missing_key(self, tmp_path):
        path = tmp_path / "ue.txt"
        path.write_text("a = 1+0j\n")
        with pytest.raises(ProtocolError):
            adversary.load_ue_params(path)


class TestEntanglingAttack:
    def test_constrained_params_leave_qubits_unchanged(self):
        p = UeParams.no_detection_point()
        for did in range(4):
            attacked = adversary.eve_entangling_attack([decoy_slot(did)], p)[0]
            # qubit factor unchanged, ancilla in the fixed state e00
            expected = np.kron(protocol.DECOY_STATES[did].amps, p.e00)
            assert np.allclose(attacked.state.amps, expected, atol=1e-12)

    def test_constrained_params_zero_detection_and_leakage(self):
        p = UeParams.no_detection_point()
        assert adversary.ue_detection_probability(p) == 0.0
        assert adversary.ue_leakage(p) <= 1e-12

    def test_full_flip_detected_on_zero_decoy(self):
        e = np.array([1, 0, 0, 0], dtype=complex)
        p = UeParams(0, 1, 1, 0, e, e, e, e)
        g = rng(7)
        attacked = adversary.eve_entangling_attack([decoy_slot(0)], p)[0]
        for seed in range(10):
            bit, _ = qsim.measure(attacked.state, Basis.Z, 0, rng(seed))
            assert bit == 1

    def test_full_flip_average_detection_is_half(self):
        # with e01 = e10 the X decoys are returned intact; only Z decoys flip
        e = np.array([1, 0, 0, 0], dtype=complex)
        p = UeParams(0, 1, 1, 0, e, e.copy(), e.copy(), e.copy())
        assert abs(adversary.ue_detection_probability(p) - 0.5) <= 1e-12

    def test_orthogonal_ancilla_leaks_and_disturbs(self):
        p = orthogonal_ancilla_params()
        assert adversary.ue_detection_probability(p) > 0.0
        assert adversary.ue_leakage(p) > 0.0

    def test_monte_carlo_matches_analytic(self):
        from qotsim import experiments
        for seed in (1, 2):
            p = adversary.sample_ue_params(rng(seed))
            row = experiments.entangling_detection_estimate(p, trials=20_000, seed=seed)
            assert abs(row.empirical - row.closed_form) <= 4 * max(row.stderr, 1e-4)

    def test_violating_params_always_detectable(self):
        # any sampled point violating the no-detection constraint by more than
        # a hair has strictly positive detection probability
        g = rng(11)
        for _ in range(200):
            p = adversary.sample_ue_params(g)
            deviation = (abs(p.b) + abs(p.c)
                         + np.linalg.norm(p.a * p.e00 - p.d * p.e11))
            if deviation > 1e-6:
                assert adversary.ue_detection_probability(p) > 0.0

    def test_rejects_multi_qubit_slot(self):
        slot = SequenceSlot(0, Role.PAYLOAD, qsim.make_bell(BellKind.PHI_PLUS))
        with pytest.raises(ProtocolError):
            adversary.eve_entangling_attack([slot], UeParams.no_detection_point())


class TestBobBellCheat:
    def test_sequence_layout(self):
        cfg = ProtocolConfig(N=3, M=4, K=2, seed=0)
        slots, pos, ids = adversary.bob_bell_cheat(cfg, rng(1))
        assert len(slots) == 3 + 4 + 4
        bell = [s for s in slots if s.role is not Role.DECOY]
        assert len(bell) == 7
        for s in bell:
            assert s.state.n_qubits == 2

    def test_per_test_detection_is_half(self):
        g = rng(2)
        n = 40_000
        hits = 0
        for _ in range(n):
            basis = Basis.Z if g.integers(2) == 0 else Basis.X
            bit, _ = qsim.measure(qsim.make_bell(BellKind.PHI_PLUS), basis, 0, g)
            hits += bit == 1
        se = np.sqrt(0.25 / n)
        assert abs(hits / n - 0.5) <= 4 * se

    def test_loyalty_test_with_random_declared_bases(self):
        g = rng(3)
        cfg = ProtocolConfig(N=2, M=0, K=4, seed=0)
        detections = 0
        n = 2_000
        for _ in range(n):
            slots, _, _ = adversary.bob_bell_cheat(cfg, g)
            bases = adversary.random_published_bases(slots, g)
            res = protocol.alice_test_loyalty(slots, cfg.K, g, published_bases=dict(enumerate(bases)))
            detections += not res.ok
        expected = 1 - 0.5 ** cfg.K
        se = np.sqrt(expected * (1 - expected) / n)
        assert abs(detections / n - expected) <= 4 * se

    def test_readout_recovers_every_pair(self):
        for pair, gate in protocol.PAULI_CODE.items():
            encoded = qsim.apply_gate(qsim.make_bell(BellKind.PHI_PLUS), gate, 0)
            assert adversary.bob_bell_cheat_readout(encoded) == pair

    def test_readout_is_bijection(self):
        seen = {adversary.bob_bell_cheat_readout(
            qsim.apply_gate(qsim.make_bell(BellKind.PHI_PLUS), g, 0))
            for g in ("I", "X", "Y", "Z")}
        assert seen == set(itertools.product((0, 1), (0, 1)))

    def test_untested_cheat_reads_all_messages(self):
        g = rng(4)
        for _ in range(200):
            pair = (int(g.integers(2)), int(g.integers(2)))
            encoded = qsim.apply_gate(qsim.make_bell(BellKind.PHI_PLUS),
                                      protocol.PAULI_CODE[pair], 0)
            assert adversary.bob_bell_cheat_readout(encoded) == pair


class TestAliceMeasureResend:
    def test_conclusive_rate_and_no_false_guesses(self):
        g = rng(5)
        n = 40_000
        conclusive = 0
        for _ in range(n):
            j = int(g.integers(2))
            slot = SequenceSlot(0, Role.PAYLOAD, protocol.choice_state(j), choice=j)
            guesses, _ = adversary.alice_measure_resend([slot], g)
            if guesses[0] is not None:
                conclusive += 1
                assert guesses[0] == j
        se = np.sqrt(0.25 * 0.75 / n)
        assert abs(conclusive / n - 0.25) <= 4 * se

    def test_guess_policy_resends_legal_preparations(self):
        g = rng(6)
        slots = [SequenceSlot(i, Role.PAYLOAD, protocol.choice_state(i % 2), choice=i % 2)
                 for i in range(50)]
        _, resent = adversary.alice_measure_resend(slots, g)
        legal = [qsim.ZERO.amps, qsim.PLUS.amps]
        for s in resent:
            assert any(np.allclose(s.state.amps, e) for e in legal)

    def test_unknown_policy_rejected(self):
        with pytest.raises(ProtocolError):
            adversary.alice_measure_resend([], rng(), policy="bogus")
