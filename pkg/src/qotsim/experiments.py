"""Monte Carlo harness comparing empirical rates against their closed forms.

Every probabilistic trial derives its random stream from (experiment seed,
trial index), so results are identical regardless of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import adversary, protocol, qsim
from .adversary import AttackScenario
from .protocol import DECOY_STATES, ProtocolError, choice_basis, choice_state, decoy_basis, decoy_bit
from .qsim import Basis, BellKind

DEFAULT_TRIALS = 100_000


def bell_cheat_detection_rate(K: int) -> float:
    """Closed-form loyalty-test detection rate against a Bell-pair cheat."""
    return 1.0 - 0.5 ** K


def intercept_detection_rate(M: int) -> float:
    """Closed-form channel-check detection rate against intercept-and-resend."""
    return 1.0 - 0.75 ** M


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: AttackScenario
    parameter: int
    trials: int = DEFAULT_TRIALS
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ProtocolError("trials must be >= 1")


@dataclass(frozen=True)
class EstimateRow:
    parameter: int
    empirical: float
    closed_form: float
    stderr: float
    trials: int

    def as_csv(self) -> str:
        return (f"{self.parameter},{self.empirical:.10g},{self.closed_form:.10g},"
                f"{self.stderr:.10g},{self.trials}")


CSV_HEADER = "parameter,empirical,closed_form,stderr,trials"


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _intercept_trial(M: int, rng: np.random.Generator) -> bool:
    """One channel check with Eve intercepting: True iff any decoy mismatches."""
    for _ in range(M):
        did = int(rng.integers(4))
        slot_state = DECOY_STATES[did]
        eve_basis = Basis.Z if rng.integers(2) == 0 else Basis.X
        _, resent = qsim.measure(slot_state, eve_basis, 0, rng)
        bit, _ = qsim.measure(resent, decoy_basis(did), 0, rng)
        if bit != decoy_bit(did):
            return True
    return False


def _bell_cheat_trial(K: int, rng: np.random.Generator) -> bool:
    """One loyalty test against a Bell-pair cheat: True iff any slot fails.

    The cheating Bob declares a uniformly random basis per tested slot; his
    transmitted half is maximally mixed, so each test fails with probability 1/2.
    """
    for _ in range(K):
        pair = qsim.make_bell(BellKind.PHI_PLUS)
        declared = Basis.Z if rng.integers(2) == 0 else Basis.X
        bit, _ = qsim.measure(pair, declared, 0, rng)
        if bit == 1:
            return True
    return False


def estimate_detection_rate(spec: ExperimentSpec) -> EstimateRow:
    """Monte Carlo detection estimate with its matching closed form."""
    if spec.scenario is AttackScenario.BOB_BELL_CHEAT:
        trial, closed = _bell_cheat_trial, bell_cheat_detection_rate
    elif spec.scenario is AttackScenario.INTERCEPT_RESEND:
        trial, closed = _intercept_trial, intercept_detection_rate
    else:
        raise ProtocolError(f"no closed-form detection rate for scenario {spec.scenario.value}")
    hits = sum(trial(spec.parameter, _trial_rng(spec.seed, t)) for t in range(spec.trials))
    p = hits / spec.trials
    stderr = float(np.sqrt(p * (1.0 - p) / spec.trials))
    return EstimateRow(spec.parameter, p, closed(spec.parameter), stderr, spec.trials)


def sweep_curve(scenario: AttackScenario, values, trials: int = DEFAULT_TRIALS,
                seed: int = 0) -> list[EstimateRow]:
    """One EstimateRow per parameter value, in order."""
    values = [int(v) for v in values]
    if not values:
        raise ProtocolError("sweep range must be nonempty")
    return [estimate_detection_rate(ExperimentSpec(scenario, v, trials, seed + i))
            for i, v in enumerate(values)]


def obliviousness_report(choice: int, chosen_bit: int) -> float:
    """Trace distance between the two encoded payload states that differ only
    in the bit Bob did not choose.

    The unchosen bit toggles I <-> Z (Z-basis slot) or X <-> Y, a global phase
    on a basis eigenstate, so the distance is exactly zero.
    """
    carrier = choice_state(choice)
    if choice == 0:
        variants = [(chosen_bit, 0), (chosen_bit, 1)]
    else:
        variants = [(0, chosen_bit), (1, chosen_bit)]
    densities = [
        qsim.density_of([qsim.apply_gate(carrier, protocol.PAULI_CODE[pair], 0)])
        for pair in variants
    ]
    return qsim.trace_distance(densities[0], densities[1])


@dataclass(frozen=True)
class AliceAttackReport:
    conclusive_rate: float
    false_conclusive: int
    bit_error_rate: float
    dummy_error_rate: float
    trials: int

    def stderr(self, rate: float) -> float:
        return float(np.sqrt(rate * (1.0 - rate) / self.trials))


def alice_attack_report(trials: int, seed: int = 0, policy: str = "guess") -> AliceAttackReport:
    """Monte Carlo rates for a dishonest Alice's measure-and-resend strategy.

    Per trial: Bob prepares one slot for a uniform choice, Alice measures and
    resends per ``policy``, encodes a random pair on whatever she resent, and
    Bob decodes in his preparation basis. A dummy-message error occurs when the
    carrier decoded wrong and the flipped carrier lands on the wrong dummy bit
    (probability one half).
    """
    if trials < 1:
        raise ProtocolError("trials must be >= 1")
    conclusive = wrong_conclusive = bit_errors = dummy_errors = 0
    for t in range(trials):
        rng = _trial_rng(seed, t)
        j = int(rng.integers(2))
        slot = protocol.SequenceSlot(0, protocol.Role.PAYLOAD, choice_state(j), choice=j)
        guesses, resent = adversary.alice_measure_resend([slot], rng, policy=policy)
        if guesses[0] is not None:
            conclusive += 1
            if guesses[0] != j:
                wrong_conclusive += 1
        pair = (int(rng.integers(2)), int(rng.integers(2)))
        encoded = qsim.apply_gate(resent[0].state, protocol.PAULI_CODE[pair], 0)
        bit, _ = qsim.measure(encoded, choice_basis(j), 0, rng)
        if bit != pair[j]:
            bit_errors += 1
            if rng.random() < 0.5:
                dummy_errors += 1
    return AliceAttackReport(conclusive / trials, wrong_conclusive,
                             bit_errors / trials, dummy_errors / trials, trials)


def entangling_detection_estimate(params, trials: int = DEFAULT_TRIALS, seed: int = 0) -> EstimateRow:
    """Monte Carlo decoy-flip rate under the entangling attack, against the
    analytic value from the isometry amplitudes."""
    if trials < 1:
        raise ProtocolError("trials must be >= 1")
    flips = 0
    for t in range(trials):
        rng = _trial_rng(seed, t)
        did = int(rng.integers(4))
        slot = protocol.SequenceSlot(0, protocol.Role.DECOY, DECOY_STATES[did], decoy_id=did)
        attacked = adversary.eve_entangling_attack([slot], params)[0]
        bit, _ = qsim.measure(attacked.state, decoy_basis(did), 0, rng)
        if bit != decoy_bit(did):
            flips += 1
    p = flips / trials
    stderr = float(np.sqrt(p * (1.0 - p) / trials))
    return EstimateRow(0, p, adversary.ue_detection_probability(params), stderr, trials)


@dataclass(frozen=True)
class HonestBatchReport:
    runs: int
    decode_errors: int
    aborts: int
    qubits_used: list[int]


def honest_batch(configs, choice_sets=None, pair_sets=None) -> HonestBatchReport:
    """Run a batch of honest protocol executions and tally decode errors."""
    errors = aborts = 0
    qubits = []
    configs = list(configs)
    for i, cfg in enumerate(configs):
        choices = choice_sets[i] if choice_sets else None
        pairs = pair_sets[i] if pair_sets else None
        t = protocol.run_honest(cfg, choices=choices, pairs=pairs)
        qubits.append(t.qubits_used)
        if t.verdict != "ok":
            aborts += 1
            continue
        expected = [t.pairs[k][t.choices[k]] for k in range(cfg.N)]
        errors += sum(1 for k in range(cfg.N) if t.decoded_bits[k] != expected[k])
    return HonestBatchReport(len(configs), errors, aborts, qubits)
