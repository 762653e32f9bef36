"""VBCT4: classical coin toss from a committed 2M x N bit matrix.

Two points D apart with gap g between each A_k and B_k.

    0        A2 sends B2 the commitment challenge; A1 names the M-1 audited pairs to B1
    g        B2 commits every matrix element; B1 unveils the audited rows
             (spacelike to the challenge reception, so B1 cannot adapt to it)
    2g       A2 forwards challenge and records to A1
    2g+D     A1 checks the audit and reports to A2
    2g+2D    B1 names his row to A1 while A2 names her column to B2
    3g+2D    B2 unveils the intersection inside the sustain window
"""
from __future__ import annotations

import numpy as np

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
from vbct.relcommit import CommitmentSession, open_positions
from vbct.spacetime import EventRef, independent, ordered, spacelike, sustain_window


def run_vbct4(params: ProtocolParams, alice: AliceStrategy, bob: BobStrategy, seed: int) -> Transcript:
    if params.protocol is not ProtocolId.VBCT4:
        raise ParameterError("run_vbct4 needs VBCT4 parameters")
    rng = make_rng(seed)
    ctx = RunContext(params, rng)
    ctx.bob_input = bob.resolve_input(ctx)
    t = Transcript(ProtocolId.VBCT4, seed, ctx.bob_input, alice.name, bob.name)
    tl = Timeline()
    sites = params.sites.sites
    A1, A2, B1, B2 = sites["A1"], sites["A2"], sites["B1"], sites["B2"]
    D, g = params.sites.D, params.sites.gap
    M, N, L = params.M, params.N, params.L
    zeros = params.zero_counts
    t.flags.update(detected=False, cheat_success=False)

    try:
        matrix, types = bob.vbct4_matrix(ctx, M, N, zeros)
        matrix = np.asarray(matrix, dtype=np.uint8)
        if matrix.shape != (2 * M, N):
            raise ParameterError(f"matrix has shape {matrix.shape}, expected {(2 * M, N)}")
        counts = (matrix == 0).sum(axis=1)
        pair_ok = [sorted(counts[2 * m: 2 * m + 2].tolist()) == sorted(zeros) for m in range(M)]
        t.records["malformed_pairs"] = [m for m, ok in enumerate(pair_ok) if not ok]

        n_bits = 2 * M * N
        challenge = rng.integers(0, 2, size=n_bits * L, dtype=np.uint8)
        key = rng.integers(0, 2, size=n_bits * L, dtype=np.uint8)
        post(tl, alice, "challenge", "challenge", A2, B2, 0.0, {"challenge_bits": n_bits * L})
        audit = alice.audit_pairs(ctx, M)
        post(tl, alice, "audit_request", "audit_request", A1, B1, 0.0, {"pairs": audit})
        ch = tl.get("challenge")

        session = CommitmentSession("B", "A", n_bits, L,
                                    sustain_until=ch.reception.time + params.sustain)
        record = session.commit(matrix.reshape(-1), challenge, key, challenge_event=ch.reception)
        post(tl, bob, "commit", "commit", B2, A2, ch.reception.time, {"record_bits": int(record.size)})

        # B1 opens every element of the audited pairs
        rows = np.array([r for m in audit for r in (2 * m, 2 * m + 1)], dtype=np.int64)
        positions = (rows[:, None] * N + np.arange(N)).reshape(-1)
        blocks = key.reshape(n_bits, L)
        values, keys = bob.vbct4_open(ctx, positions, matrix, blocks)
        req = tl.get("audit_request").reception.time
        audit_msg = post(tl, bob, "audit_unveil", "audit_unveil", B1, A1, req,
                         {"rows": rows.tolist(), "values": np.asarray(values).tolist()})
        tl.require(spacelike(EventRef("audit_unveil", "emission"), EventRef("challenge", "reception"),
                             "audit unveil ignorant of the challenge"))

        commit_rx = tl.get("commit").reception.time
        fwd = post(tl, alice, "forward", "forward", A2, A1, commit_rx, {"record_bits": int(record.size)})
        check_time = max(fwd.reception.time, audit_msg.reception.time)
        res = open_positions(session, positions, values, keys, audit_msg.emission)
        opened = np.asarray(values, dtype=np.uint8).reshape(len(rows), N)
        per_pair = (opened == 0).sum(axis=1).reshape(-1, 2).tolist()
        counts_ok = all(sorted(z) == sorted(zeros) for z in per_pair)
        t.records["audited_pairs"] = list(audit)
        t.records["audit_valid"] = bool(res.accepted)
        verdict = bool(res.accepted and counts_ok)
        post(tl, alice, "verdict", "verdict", A1, A2, check_time, {"passed": verdict})
        if not verdict:
            t.flags["detected"] = True
            return finish(tl, t, Outcome.abort(AbortReason.FAILED_HONESTY_TEST))

        remaining = [m for m in range(M) if m not in set(audit)]
        if len(remaining) != 1:
            raise ParameterError("audit must leave exactly one pair")
        pair = remaining[0]
        t5 = tl.get("verdict").reception.time
        row = bob.vbct4_row(ctx, pair, types, matrix)
        col = alice.pick_column(ctx, N)
        post(tl, bob, "row_choice", "row_choice", B1, A1, t5, {"row": row})
        post(tl, alice, "col_choice", "col_choice", A2, B2, t5, {"column": col})
        tl.require(independent("row_choice", "col_choice", "row and column chosen independently"))

        col_rx = tl.get("col_choice").reception.time
        pos = row * N + col
        v, k = bob.vbct4_open(ctx, np.array([pos]), matrix, blocks)
        final = post(tl, bob, "final_unveil", "final_unveil", B2, A2, col_rx,
                     {"row": row, "column": col, "value": int(np.asarray(v)[0])})
        tl.require(ordered(EventRef("col_choice", "reception"), EventRef("final_unveil", "emission"),
                           "final unveil after the column is known"))
        tl.require(sustain_window(EventRef("challenge", "reception"), EventRef("final_unveil", "emission"),
                                  params.sustain, "commitments sustained until the final unveil"))
        res = open_positions(session, [pos], v, k, final.emission, final=True)
        if not res.accepted:
            t.flags["detected"] = True
            t.records["unveil_reject"] = res.reason.value
            return finish(tl, t, Outcome.abort(AbortReason.INVALID_UNVEIL))
        t.records.update(pair=pair, row=row, column=col, row_type=int(types[row]),
                         opened_after_choice=[int(pos)])
        t.flags["cheat_success"] = not pair_ok[pair]
        return finish(tl, t, Outcome(int(res.value[0])))
    except TimingAbort:
        t.flags["detected"] = True
        return finish(tl, t, Outcome.abort(AbortReason.TIMING))
    except Refuse:
        return finish(tl, t, Outcome.abort(AbortReason.REFUSAL))
