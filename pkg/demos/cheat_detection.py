"""Detection of Bob's state substitution in VBCT2 as the deviation grows,
with the delta' delta^2 lower bound alongside, plus the z-mismatch contrast
between VBCT2 (one bit leaked, always exposed) and VBCT3 (nothing leaked)."""
import sys

from vbct import analysis as an
from vbct.adversary import alice_vbct2_z_mismatch, bob_vbct2_substitution
from vbct.protocols import AliceStrategy, BobStrategy, ProtocolParams, run, trial_seed
from vbct.qstate import BiasParams, pass_probability


def tally(params, alice, bob, trials, seed=0):
    t = an.Tally()
    for i in range(trials):
        t.add(run(params, alice, bob, trial_seed(seed, i)))
    return t


def main(trials: int = 500) -> None:
    p = ProtocolParams("vbct2", BiasParams(alpha0_sq=0.6, alpha1_sq=0.4), N=20, M=6)
    print(f"{'delta':>6} {'P(pass)':>8} {'detected':>9} {'lower bound':>12}")
    for delta in (0.05, 0.1, 0.2, 0.3, 0.4):
        t = tally(p, AliceStrategy(), bob_vbct2_substitution(delta), trials)
        det = t.flags.get("detected", 0) / t.n
        lb = an.vbct2_detection_lower_bound(delta, 1.0, p.M)
        print(f"{delta:6.2f} {pass_probability(0.6, delta):8.4f} {det:9.4f} {lb:12.4f}")

    print("\nz-mismatch attack, Bob's input uniform:")
    for pid in ("vbct2", "vbct3"):
        q = ProtocolParams(pid, BiasParams(alpha0_sq=0.9, alpha1_sq=0.1), N=2, M=2, L=4)
        t = tally(q, alice_vbct2_z_mismatch(), BobStrategy(), 4 * trials)
        leak = an.leakage_from_counts(t.view_pairs, t.outcome_pairs)
        print(f"  {pid}: leakage {leak:.3f} bits, detected {t.flags.get('detected', 0) / t.n:.3f}, "
              f"aborted {sum(t.aborts.values()) / t.n:.3f}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 500)
