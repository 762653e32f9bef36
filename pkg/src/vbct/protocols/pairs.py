"""Pair-state protocols: VBCT2, its commitment-armoured variant VBCT3, and the die roll.

Two agreed points D apart; A_k sits on point k and B_k a small gap g beyond
it. One batch starting at time T runs as follows.

    T        B1 prepares N states and sends Alice's halves to A1
    T+g      A1 and A2 announce z (A2's announcement spacelike to the batch)
    T+2g     z arrives; B1 and B2 broadcast it to each other (lands at T+2g+D)
    z = 1    B1 returns his halves with the identities, B2 sends the
             identities; A2 forwards hers to A1, who tests every state
    z = 0    VBCT2: B1 and B2 name the chosen index to A1 and A2.
             VBCT3: A2 challenges D/2 after announcing, B2 commits to the
             index, the B agents compare z at T+2g+D and only then B1 unveils.

A state is stored as its amplitude vector over |jk> with B1's system first.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from vbct import qstate
from vbct.errors import ParameterError
from vbct.protocols.base import (
    AbortReason,
    Outcome,
    ProtocolId,
    ProtocolParams,
    Refuse,
    RunContext,
    TimingAbort,
    Timeline,
    Transcript,
    finish,
    make_rng,
    post,
)
from vbct.protocols.strategies import AliceStrategy, BobStrategy
from vbct.relcommit import CommitmentSession, RejectReason, as_bits, bits_to_int, int_to_bits, unveil
from vbct.spacetime import Delay, EventRef, independent, ordered, spacelike

_TABLES: dict[tuple, np.ndarray] = {}


def state_table(params: ProtocolParams) -> np.ndarray:
    """Amplitude rows of the honest states, indexed by label."""
    if params.protocol is ProtocolId.DIE_ROLL:
        key = ("die",) + tuple(params.dice)
    else:
        key = ("pair", params.bias.alpha0_sq, params.bias.alpha1_sq)
    table = _TABLES.get(key)
    if table is None:
        if key[0] == "die":
            rows = [qstate.make_correlated_state(p).amplitudes for p in params.dice]
        else:
            rows = [qstate.make_pair_state(a).amplitudes for a in key[1:]]
        table = np.array(rows, dtype=complex)
        table.setflags(write=False)
        _TABLES[key] = table
    return table


def _overlaps(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise |<a_k|b_k>|^2."""
    return np.abs(np.einsum("ij,ij->i", np.conj(a), b)) ** 2


def _measure_pair(ctx: RunContext, amps: np.ndarray, d: int) -> tuple[int, int]:
    """Both halves measured in the computational basis: (B1's j, A1's k)."""
    probs = np.abs(amps) ** 2
    idx = qstate.born_index(probs / probs.sum(), ctx.rng.random())
    return idx // d, idx % d


def _run_pairs(params: ProtocolParams, alice: AliceStrategy, bob: BobStrategy, seed: int,
               committed: bool) -> Transcript:
    rng = make_rng(seed)
    ctx = RunContext(params, rng)
    table = state_table(params)
    kinds = table.shape[0]
    d = int(round(math.sqrt(table.shape[1])))
    ctx.bob_input = bob.resolve_input(ctx, kinds)
    t = Transcript(params.protocol, seed, ctx.bob_input, alice.name, bob.name)
    tl = Timeline()
    sites = params.sites.sites
    A1, A2, B1, B2 = sites["A1"], sites["A2"], sites["B1"], sites["B2"]
    D, g = params.sites.D, params.sites.gap
    period = D + 4 * g

    tested = cheat_tested = cheat_passed = failed = 0
    t.records.update(batches=0, audited_states=0)
    t.flags.update(detected=False, cheat_evident=False, cheat_success=False)

    def done(outcome: Outcome) -> Transcript:
        t.records.update(audited_states=tested, cheat_states_audited=cheat_tested,
                         cheat_states_passed=cheat_passed, failed_states=failed)
        return finish(tl, t, outcome)

    try:
        batch_no = 0
        while True:
            batch_no += 1
            t.records["batches"] = batch_no
            T = (batch_no - 1) * period
            sfx = f"_{batch_no}"
            batch = bob.prepare_batch(ctx, table, params.N)
            post(tl, bob, "halves", "halves" + sfx, B1, A1, T,
                 {"batch": batch_no, "qubits": len(batch)})

            z1, z2 = alice.z_values(ctx, batch_no)
            post(tl, alice, "z1", "z1" + sfx, A1, B1, T + g, {"z": z1})
            post(tl, alice, "z2", "z2" + sfx, A2, B2, T + g, {"z": z2})
            tl.require(independent("z2" + sfx, "halves" + sfx, "A2's z independent of the batch"))
            tz1 = tl.get("z1" + sfx).reception.time
            tz2 = tl.get("z2" + sfx).reception.time
            # B agents broadcast the z they received; it lands after D
            post(tl, bob, "zx", "zx1" + sfx, B1, B2, tz1, {"z": z1})
            post(tl, bob, "zx", "zx2" + sfx, B2, B1, tz2, {"z": z2})
            labels = [int(x) for x in batch.labels]

            if z1 == 1:
                post(tl, bob, "reveal_q", "reveal_q" + sfx, B1, A1, tz1,
                     {"batch": batch_no, "qubits": len(batch), "labels": labels})
                if committed:
                    tl.require(independent("reveal_q" + sfx, "z2" + sfx, "B1's reveal ignorant of A2's z"))
            if z2 == 1:
                post(tl, bob, "reveal_id", "reveal_id" + sfx, B2, A2, tz2,
                     {"batch": batch_no, "labels": labels})
                if committed:
                    tl.require(independent("reveal_id" + sfx, "z1" + sfx, "B2's reveal ignorant of A1's z"))

            if z1 == 1 and z2 == 1:
                m = tl.get("reveal_id" + sfx)
                post(tl, alice, "forward", "forward" + sfx, A2, A1, m.reception.time,
                     {"batch": batch_no, "labels": labels})
                # A1 projects every returned pair onto the declared state
                p_pass = _overlaps(table[batch.labels], batch.amps)
                passed = rng.random(len(batch)) < p_pass
                tested += len(batch)
                cheat_tested += int(batch.cheat.sum())
                cheat_passed += int((passed & batch.cheat).sum())
                failed += int((~passed).sum())
                if not passed.all():
                    t.flags["detected"] = True
                    return done(Outcome.abort(AbortReason.FAILED_HONESTY_TEST))
                continue

            # at least one A agent trusted Bob with this batch
            target = ctx.bob_input
            index = bob.choose_index(ctx, batch, target)
            t.records.update(index=index, label=labels[index],
                             chose_cheat_state=bool(batch.cheat[index]))

            if committed:
                result = _commit_and_unveil(ctx, tl, t, alice, bob, batch_no, index, z1, z2)
                if isinstance(result, Outcome):
                    return done(result)
                index = result
            else:
                if z1 == 0:
                    post(tl, bob, "choice", "choice1" + sfx, B1, A1, tz1, {"index": index})
                if z2 == 0:
                    post(tl, bob, "choice", "choice2" + sfx, B2, A2, tz2, {"index": index})
                if z1 != z2:
                    # Alice has what she wanted; Bob finds out once zx lands
                    t.flags.update(detected=True, cheat_evident=True)
                    return done(Outcome.abort(AbortReason.Z_MISMATCH))

            b_out, a_out = _measure_pair(ctx, batch.amps[index], d)
            t.records.update(alice_result=a_out, bob_result=b_out)
            t.flags["cheat_success"] = bool(batch.cheat[index])
            outcome = Outcome(a_out)

            if params.supplementary_test:
                keep = np.ones(len(batch), dtype=bool)
                keep[index] = False
                t_out = max(m.reception.time for m in tl.messages)
                post(tl, bob, "return_request", "return_request", B1, A1, t_out, {"except": index})
                req = tl.get("return_request").reception.time
                returned = np.asarray(alice.return_halves(ctx, batch, index, a_out))
                post(tl, alice, "return", "return", A1, B1, req, {"qubits": int(keep.sum())})
                ok = rng.random(int(keep.sum())) < _overlaps(batch.amps[keep], returned)
                t.records["supplementary_failures"] = int((~ok).sum())
                if not ok.all():
                    t.records["pre_abort_outcome"] = a_out
                    return done(Outcome.abort(AbortReason.POST_OUTCOME_TEST))
            return done(outcome)
    except TimingAbort:
        t.flags["detected"] = True
        return done(Outcome.abort(AbortReason.TIMING))
    except Refuse:
        return done(Outcome.abort(AbortReason.REFUSAL))


def _commit_and_unveil(ctx: RunContext, tl: Timeline, t: Transcript, alice: AliceStrategy,
                       bob: BobStrategy, batch_no: int, index: int, z1: int, z2: int):
    """VBCT3 steps 5 to 8. Returns the unveiled index or an abort Outcome."""
    params = ctx.params
    rng = ctx.rng
    sites = params.sites.sites
    A1, A2, B1, B2 = sites["A1"], sites["A2"], sites["B1"], sites["B2"]
    D = params.sites.D
    sfx = f"_{batch_no}"
    bits, L = params.index_bits, params.L
    session = CommitmentSession("B", "A", bits, L)

    if z2 == 0:
        z2_msg = tl.get("z2" + sfx)
        challenge = rng.integers(0, 2, size=bits * L, dtype=np.uint8)
        post(tl, alice, "challenge", "challenge" + sfx, A2, B2,
             z2_msg.emission.time + alice.challenge_delay(ctx), {"challenge": challenge})
        tl.require(Delay(EventRef("z2" + sfx, "reception"), EventRef("challenge" + sfx, "reception"),
                         minimum=D / 2, maximum=D / 2, tolerance=params.tolerance,
                         name="A2 waits D/2 before challenging"))
        ch = tl.get("challenge" + sfx)
        # the key comes from the randomness B1 and B2 share
        key = rng.integers(0, 2, size=bits * L, dtype=np.uint8)
        record = session.commit(int_to_bits(index, bits), challenge, key,
                                challenge_event=ch.reception)
        post(tl, bob, "commit", "commit" + sfx, B2, A2, ch.reception.time, {"record": record})
        t.records["committed_index"] = index

    # step 7: both B agents have the other's z by T + 2g + D
    check_time = max(tl.get("zx1" + sfx).reception.time, tl.get("zx2" + sfx).reception.time)
    if z1 != z2:
        t.flags.update(detected=True, cheat_evident=True)
        return Outcome.abort(AbortReason.Z_MISMATCH)

    v_bits, k_bits = bob.vbct3_unveil(ctx, index, key, bits)
    m = post(tl, bob, "unveil", "unveil" + sfx, B1, A1, check_time,
             {"index_bits": as_bits(v_bits), "key": as_bits(k_bits)})
    tl.require(spacelike(EventRef("unveil" + sfx, "emission"), EventRef("challenge" + sfx, "reception"),
                         "unveil ignorant of the challenge"))
    tl.require(ordered(EventRef("zx2" + sfx, "reception"), EventRef("unveil" + sfx, "emission"),
                       "unveil only after the z comparison"))
    res = unveil(session, v_bits, k_bits, m.emission)
    value = bits_to_int(res.value) if res.accepted else None
    if not res.accepted or value >= params.N:
        t.records["unveil_reject"] = (res.reason or RejectReason.MISMATCH).value
        t.flags["detected"] = True
        return Outcome.abort(AbortReason.INVALID_UNVEIL)
    t.records["unveiled_index"] = value
    t.flags["equivocated"] = value != index
    return value


def run_vbct2(params: ProtocolParams, alice: AliceStrategy, bob: BobStrategy, seed: int) -> Transcript:
    if params.protocol is not ProtocolId.VBCT2:
        raise ParameterError("run_vbct2 needs VBCT2 parameters")
    return _run_pairs(params, alice, bob, seed, committed=False)


def run_vbct3(params: ProtocolParams, alice: AliceStrategy, bob: BobStrategy, seed: int) -> Transcript:
    if params.protocol is not ProtocolId.VBCT3:
        raise ParameterError("run_vbct3 needs VBCT3 parameters")
    return _run_pairs(params, alice, bob, seed, committed=True)


def run_die_roll(params: ProtocolParams, n_faces: int, dice_set, bob_choice: int | None, seed: int,
                 alice: AliceStrategy | None = None, bob: BobStrategy | None = None) -> Transcript:
    """Honest die roll: Bob picks die ``bob_choice`` and face j comes up with
    probability dice_set[bob_choice][j]."""
    dice = tuple(tuple(float(x) for x in p) for p in dice_set)
    if any(len(p) != n_faces for p in dice):
        raise ParameterError(f"every die needs exactly {n_faces} faces")
    if params.protocol is not ProtocolId.DIE_ROLL:
        raise ParameterError("run_die_roll needs die-roll parameters")
    if dice != params.dice:
        params = replace(params, dice=dice)
    if bob is None:
        bob = BobStrategy(bob_choice)
    return _run_pairs(params, alice or AliceStrategy(), bob, seed, committed=False)
