"""Protocol engines. :func:`run` dispatches on ``params.protocol``."""
from vbct.protocols.base import (
    AbortReason,
    Outcome,
    ProtocolId,
    ProtocolParams,
    Refuse,
    RunContext,
    Transcript,
    make_rng,
    trial_seed,
)
from vbct.protocols.pairs import run_die_roll, run_vbct2, run_vbct3, state_table
from vbct.protocols.strategies import AliceStrategy, BobStrategy, PairBatch, RoundChoice
from vbct.protocols.vbct1 import run_vbct1
from vbct.protocols.vbct4 import run_vbct4


def run(params: ProtocolParams, alice: AliceStrategy, bob: BobStrategy, seed: int) -> Transcript:
    p = params.protocol
    if p is ProtocolId.VBCT1:
        return run_vbct1(params, alice, bob, seed)
    if p is ProtocolId.VBCT2:
        return run_vbct2(params, alice, bob, seed)
    if p is ProtocolId.VBCT3:
        return run_vbct3(params, alice, bob, seed)
    if p is ProtocolId.VBCT4:
        return run_vbct4(params, alice, bob, seed)
    n_faces = len(params.dice[0])
    return run_die_roll(params, n_faces, params.dice, bob.w, seed, alice=alice, bob=bob)


__all__ = [
    "AbortReason", "AliceStrategy", "BobStrategy", "Outcome", "PairBatch", "ProtocolId",
    "ProtocolParams", "Refuse", "RoundChoice", "RunContext", "Transcript", "make_rng", "run",
    "run_die_roll", "run_vbct1", "run_vbct2", "run_vbct3", "run_vbct4", "state_table", "trial_seed",
]
