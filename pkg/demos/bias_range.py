"""Honest VBCT1: outcome-0 frequency for both Bob inputs against 1/2(1 +- sin theta).

    python3 demos/bias_range.py [trials]
"""
import math
import sys

import numpy as np

from vbct.protocols import AliceStrategy, BobStrategy, ProtocolParams, run, trial_seed
from vbct.qstate import BiasParams


def main(trials: int = 20_000) -> None:
    print(f"{'theta':>7} {'p_max':>7} {'p0|w=0':>8} {'p0|w=1':>8} {'p_min':>7}")
    for theta in np.linspace(0.0, math.pi / 2, 7):
        p = ProtocolParams("vbct1", BiasParams(theta=float(theta)), poisson_mean=3.0)
        freq = []
        for w in (0, 1):
            bob = BobStrategy(w=w)
            zeros = sum(run(p, AliceStrategy(), bob, trial_seed(w, i)).outcome.value == 0 for i in range(trials))
            freq.append(zeros / trials)
        print(f"{theta:7.4f} {p.bias.p_max:7.4f} {freq[0]:8.4f} {freq[1]:8.4f} {p.bias.p_min:7.4f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 20_000)
