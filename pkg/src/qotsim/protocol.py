"""Honest-party state machines for the six-step oblivious transfer run.

Bob encodes his per-slot choice j as a preparation in {|0>, |+>} (j=0 -> |0>,
j=1 -> |+>). Alice encodes a message pair (m0, m1) with a Pauli gate:
00 -> I, 01 -> Z, 10 -> X, 11 -> Y. Bob measures each payload slot in the basis
he prepared, so a Z-basis slot yields m0 and an X-basis slot yields m1; the
other bit only ever shows up as a global phase on the carrier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import qsim
from .qsim import Basis, PureState

TRANSCRIPT_VERSION = 1

#: decoy preparations by id: 0 -> |0>, 1 -> |1>, 2 -> |+>, 3 -> |->
DECOY_STATES = (qsim.ZERO, qsim.ONE, qsim.PLUS, qsim.MINUS)

#: message-pair to gate encoding
PAULI_CODE: dict[tuple[int, int], str] = {
    (0, 0): "I",
    (0, 1): "Z",
    (1, 0): "X",
    (1, 1): "Y",
}


def decoy_basis(decoy_id: int) -> Basis:
    return Basis.Z if decoy_id < 2 else Basis.X


def decoy_bit(decoy_id: int) -> int:
    return decoy_id & 1


def choice_basis(choice: int) -> Basis:
    return Basis.Z if choice == 0 else Basis.X


def choice_state(choice: int) -> PureState:
    return qsim.ZERO if choice == 0 else qsim.PLUS


class Role(Enum):
    PAYLOAD = "payload"
    LOYALTY = "loyalty"
    DECOY = "decoy"


class ProtocolError(Exception):
    """Malformed input to a protocol step."""


@dataclass
class SequenceSlot:
    """One position of the transmitted sequence.

    ``choice``/``decoy_id`` are the owner's private preparation record; the
    counterparty's code must only rely on ``state`` (and, for adversary slots,
    the transmitted qubit is always tensor factor 0 of ``state``).
    """

    position: int
    role: Role
    state: PureState
    choice: int | None = None
    decoy_id: int | None = None
    payload_index: int | None = None
    pair: tuple[int, int] | None = None


@dataclass(frozen=True)
class ProtocolConfig:
    N: int
    M: int = 0
    M2: int = 0
    K: int = 0
    tau: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ProtocolError("N must be >= 1")
        if min(self.M, self.M2, self.K) < 0:
            raise ProtocolError("M, M2 and K must be nonnegative")
        if not 0.0 <= self.tau < 1.0:
            raise ProtocolError("tau must lie in [0, 1)")

    @property
    def sequence_length(self) -> int:
        return self.N + self.M + 2 * self.K


def insert_decoys(slots: list[SequenceSlot], m: int, rng: np.random.Generator,
                  ) -> tuple[list[SequenceSlot], list[int], list[int]]:
    """Insert m uniformly random decoys at uniformly random positions.

    Returns the new sequence plus the decoy positions and state ids (the
    owner's private record, later published for channel checking).
    """
    total = len(slots) + m
    positions = sorted(int(p) for p in rng.choice(total, size=m, replace=False)) if m else []
    ids = [int(i) for i in rng.integers(0, 4, size=m)]
    out: list[SequenceSlot] = []
    it = iter(slots)
    decoy_at = dict(zip(positions, ids))
    for pos in range(total):
        if pos in decoy_at:
            did = decoy_at[pos]
            out.append(SequenceSlot(pos, Role.DECOY, DECOY_STATES[did], decoy_id=did))
        else:
            s = next(it)
            out.append(replace(s, position=pos))
    return out, positions, ids


def bob_prepare_sequence(choices, M: int, rng: np.random.Generator, n_loyalty: int = 0,
                         ) -> tuple[list[SequenceSlot], list[int], list[int]]:
    """Step 1: build the sequence of payload + loyalty slots with M decoys mixed in.

    The last ``n_loyalty`` entries of ``choices`` are loyalty slots; the rest
    are payload, whose ``payload_index`` records which intended choice they carry.
    Returns (slots, decoy positions, decoy ids).
    """
    choices = [int(c) for c in choices]
    if any(c not in (0, 1) for c in choices):
        raise ProtocolError("choices must be bits")
    if not 0 <= n_loyalty <= len(choices):
        raise ProtocolError("loyalty count exceeds choice count")
    n_payload = len(choices) - n_loyalty
    slots = []
    for i, c in enumerate(choices):
        role = Role.PAYLOAD if i < n_payload else Role.LOYALTY
        slots.append(SequenceSlot(
            i, role, choice_state(c), choice=c,
            payload_index=i if role is Role.PAYLOAD else None,
        ))
    return insert_decoys(slots, M, rng)


@dataclass
class CheckResult:
    error_rate: float
    ok: bool
    remaining: list[SequenceSlot] = field(repr=False)


def check_published_decoys(slots: list[SequenceSlot], published, rng: np.random.Generator,
                           tau: float = 0.0) -> CheckResult:
    """Measure each published decoy in its published basis and strip them out.

    ``published`` is a list of (position, decoy_id) pairs indexing the sequence
    as sent. Used for both directions of channel checking (Steps 2 and 6).
    """
    positions = {pos for pos, _ in published}
    if any(not 0 <= pos < len(slots) for pos in positions):
        raise ProtocolError("published decoy position out of range")
    if len(positions) != len(published):
        raise ProtocolError("duplicate published decoy position")
    mismatches = 0
    for pos, did in published:
        bit, _ = qsim.measure(slots[pos].state, decoy_basis(did), 0, rng)
        if bit != decoy_bit(did):
            mismatches += 1
    error_rate = mismatches / len(published) if published else 0.0
    remaining = [replace(s, position=i)
                 for i, s in enumerate(s for s in slots if s.position not in positions)]
    return CheckResult(error_rate, error_rate <= tau, remaining)


def alice_check_channel(slots, published, rng, tau: float = 0.0) -> CheckResult:
    """Step 2a: Alice verifies Bob's published decoys; abort if error rate > tau."""
    return check_published_decoys(slots, published, rng, tau)


@dataclass
class LoyaltyResult:
    ok: bool
    positions: list[int]
    outcomes: list[int]
    remaining: list[SequenceSlot] = field(repr=False)


def alice_test_loyalty(slots: list[SequenceSlot], K: int, rng: np.random.Generator,
                       tau: float = 0.0, positions=None, published_bases=None) -> LoyaltyResult:
    """Step 2b: Alice measures K randomly chosen slots in Bob's published bases.

    An honest slot is a basis eigenstate and always yields outcome 0; any
    outcome 1 counts as a loyalty failure. ``positions`` and ``published_bases``
    may be forced (the latter models a dishonest Bob's declarations).
    """
    if K > len(slots):
        raise ProtocolError("K exceeds available slots")
    if positions is None:
        positions = sorted(int(p) for p in rng.choice(len(slots), size=K, replace=False))
    else:
        positions = sorted(int(p) for p in positions)
        if len(set(positions)) != K or any(not 0 <= p < len(slots) for p in positions):
            raise ProtocolError("invalid loyalty test positions")
    outcomes = []
    for p in positions:
        slot = slots[p]
        if published_bases is not None:
            basis = published_bases[p]
        else:
            if slot.choice is None:
                raise ProtocolError(f"slot {p} has no preparation basis to publish")
            basis = choice_basis(slot.choice)
        bit, _ = qsim.measure(slot.state, basis, 0, rng)
        outcomes.append(bit)
    failure_rate = sum(outcomes) / K if K else 0.0
    tested = set(positions)
    remaining = [replace(s, position=i)
                 for i, s in enumerate(s for s in slots if s.position not in tested)]
    return LoyaltyResult(failure_rate <= tau, positions, outcomes, remaining)


def plan_reorder(slots: list[SequenceSlot], intended) -> list[int]:
    """Bob's side of Step 3: pick a permutation putting his intended choice
    string on the first N slots.

    Surviving payload slots return to their own intended position; consumed
    positions are backfilled by surviving loyalty slots carrying the needed
    choice (falling back to any unused slot with that choice).
    """
    intended = [int(c) for c in intended]
    n = len(intended)
    used = [False] * len(slots)
    by_payload_index = {s.payload_index: k for k, s in enumerate(slots) if s.role is Role.PAYLOAD}
    perm: list[int] = []
    for i, want in enumerate(intended):
        k = by_payload_index.get(i)
        if k is None:
            k = next((j for j, s in enumerate(slots)
                      if not used[j] and s.role is Role.LOYALTY and s.choice == want), None)
        if k is None:
            k = next((j for j, s in enumerate(slots) if not used[j] and s.choice == want), None)
        if k is None:
            raise ProtocolError(f"no surviving slot can realize choice {want} at position {i}")
        used[k] = True
        perm.append(k)
    perm.extend(j for j in range(len(slots)) if not used[j])
    return perm


def bob_reorder(slots: list[SequenceSlot], permutation, n_keep: int) -> list[SequenceSlot]:
    """Step 3: Alice applies Bob's permutation; slots beyond the first n_keep
    are discarded."""
    permutation = [int(p) for p in permutation]
    if sorted(permutation) != list(range(len(slots))):
        raise ProtocolError("reorder request is not a permutation of the sequence")
    reordered = [replace(slots[p], position=i) for i, p in enumerate(permutation)]
    return reordered[:n_keep]


def alice_encode(slots: list[SequenceSlot], pairs) -> list[SequenceSlot]:
    """Step 4: apply the Pauli encoding of each message pair to its slot."""
    pairs = [(int(m0), int(m1)) for m0, m1 in pairs]
    if len(pairs) != len(slots):
        raise ProtocolError(f"{len(pairs)} message pairs for {len(slots)} slots")
    out = []
    for slot, pair in zip(slots, pairs):
        gate = PAULI_CODE[pair]
        out.append(replace(slot, state=qsim.apply_gate(slot.state, gate, 0), pair=pair))
    return out


def alice_insert_decoys(slots, M2: int, rng) -> tuple[list[SequenceSlot], list[int], list[int]]:
    """Step 5: Alice mixes her own channel-checking decoys into the return trip."""
    return insert_decoys(slots, M2, rng)


@dataclass
class DecodeResult:
    ok: bool
    error_rate: float
    bits: list[int]


def bob_check_and_decode(slots: list[SequenceSlot], published, choices,
                         rng: np.random.Generator, tau: float = 0.0) -> DecodeResult:
    """Step 6: Bob verifies Alice's decoys, then reads each payload slot in the
    basis he prepared."""
    check = check_published_decoys(slots, published, rng, tau)
    choices = [int(c) for c in choices]
    if len(check.remaining) != len(choices):
        raise ProtocolError("payload length does not match Bob's choice record")
    if not check.ok:
        return DecodeResult(False, check.error_rate, [])
    bits = []
    for slot, c in zip(check.remaining, choices):
        bit, _ = qsim.measure(slot.state, choice_basis(c), 0, rng)
        bits.append(bit)
    return DecodeResult(True, check.error_rate, bits)


@dataclass
class Transcript:
    """Seeded, replayable record of one protocol run."""

    version: int
    seed: int
    config: ProtocolConfig
    choices: list[int]
    loyalty_choices: list[int]
    pairs: list[tuple[int, int]]
    bob_decoy_positions: list[int]
    bob_decoy_ids: list[int]
    channel_error_rate: float
    loyalty_positions: list[int]
    loyalty_outcomes: list[int]
    permutation: list[int]
    alice_decoy_positions: list[int]
    alice_decoy_ids: list[int]
    return_error_rate: float
    decoded_bits: list[int]
    verdict: str
    qubits_used: int

    def to_json_line(self) -> str:
        d = {
            "version": self.version,
            "seed": self.seed,
            "config": {"N": self.config.N, "M": self.config.M, "M2": self.config.M2,
                       "K": self.config.K, "tau": self.config.tau},
            "choices": self.choices,
            "loyalty_choices": self.loyalty_choices,
            "pairs": [list(p) for p in self.pairs],
            "bob_decoy_positions": self.bob_decoy_positions,
            "bob_decoy_ids": self.bob_decoy_ids,
            "channel_error_rate": self.channel_error_rate,
            "loyalty_positions": self.loyalty_positions,
            "loyalty_outcomes": self.loyalty_outcomes,
            "permutation": self.permutation,
            "alice_decoy_positions": self.alice_decoy_positions,
            "alice_decoy_ids": self.alice_decoy_ids,
            "return_error_rate": self.return_error_rate,
            "decoded_bits": self.decoded_bits,
            "verdict": self.verdict,
            "qubits_used": self.qubits_used,
        }
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def parse_json_line(line: str) -> dict:
        d = json.loads(line)
        if d.get("version") != TRANSCRIPT_VERSION:
            raise ProtocolError(f"unsupported transcript version {d.get('version')!r}")
        return d


def default_loyalty_choices(K: int) -> list[int]:
    """K slots of each choice; at most K slots are ever consumed by testing,
    so a matching backfill always exists for every vacated payload position."""
    return [0] * K + [1] * K


def run_honest(config: ProtocolConfig, choices=None, pairs=None) -> Transcript:
    """Execute one full honest run (Steps 1-6) and record the transcript.

    ``choices`` (length N) and ``pairs`` (N message pairs) are drawn from a
    dedicated input stream when omitted, so a replay with recorded inputs
    consumes the protocol stream identically.
    """
    rng_inputs = np.random.default_rng([config.seed, 0])
    rng = np.random.default_rng([config.seed, 1])
    if choices is None:
        choices = [int(b) for b in rng_inputs.integers(0, 2, size=config.N)]
    else:
        choices = [int(c) for c in choices]
    if pairs is None:
        pairs = [(int(a), int(b)) for a, b in rng_inputs.integers(0, 2, size=(config.N, 2))]
    else:
        pairs = [(int(a), int(b)) for a, b in pairs]
    if len(choices) != config.N or len(pairs) != config.N:
        raise ProtocolError("need exactly N choices and N message pairs")

    loyalty_choices = default_loyalty_choices(config.K)
    qubits_used = config.sequence_length + config.M2

    def finish(verdict, channel_err=0.0, loyalty=None, perm=None,
               a_pos=None, a_ids=None, ret_err=0.0, bits=None,
               b_pos=None, b_ids=None):
        return Transcript(
            TRANSCRIPT_VERSION, config.seed, config, choices, loyalty_choices, pairs,
            b_pos or [], b_ids or [], channel_err,
            loyalty.positions if loyalty else [], loyalty.outcomes if loyalty else [],
            perm or [], a_pos or [], a_ids or [], ret_err, bits or [], verdict, qubits_used,
        )

    # Step 1
    slots, b_pos, b_ids = bob_prepare_sequence(
        choices + loyalty_choices, config.M, rng, n_loyalty=2 * config.K)
    # Step 2
    check = alice_check_channel(slots, list(zip(b_pos, b_ids)), rng, config.tau)
    if not check.ok:
        return finish("abort:channel", check.error_rate, b_pos=b_pos, b_ids=b_ids)
    loyalty = alice_test_loyalty(check.remaining, config.K, rng, config.tau)
    if not loyalty.ok:
        return finish("abort:loyalty", check.error_rate, loyalty, b_pos=b_pos, b_ids=b_ids)
    # Step 3
    perm = plan_reorder(loyalty.remaining, choices)
    payload = bob_reorder(loyalty.remaining, perm, config.N)
    # Step 4
    payload = alice_encode(payload, pairs)
    # Step 5
    outbound, a_pos, a_ids = alice_insert_decoys(payload, config.M2, rng)
    # Step 6
    decode = bob_check_and_decode(outbound, list(zip(a_pos, a_ids)), choices, rng, config.tau)
    verdict = "ok" if decode.ok else "abort:return-channel"
    return finish(verdict, check.error_rate, loyalty, perm, a_pos, a_ids,
                  decode.error_rate, decode.bits, b_pos, b_ids)


def replay_transcript(line: str) -> tuple[bool, str]:
    """Re-execute a recorded run from its seed and inputs.

    Returns (verified, detail); on divergence the detail names the first
    differing field.
    """
    d = Transcript.parse_json_line(line)
    cfg = ProtocolConfig(seed=d["seed"], **d["config"])
    fresh = run_honest(cfg, choices=d["choices"], pairs=[tuple(p) for p in d["pairs"]])
    fresh_line = fresh.to_json_line()
    if fresh_line == line.strip():
        return True, "verified"
    new = json.loads(fresh_line)
    for key in sorted(set(d) | set(new)):
        if d.get(key) != new.get(key):
            return False, f"divergence at field {key!r}: stored {d.get(key)!r}, replayed {new.get(key)!r}"
    return False, "divergence in formatting"
