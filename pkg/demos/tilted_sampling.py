"""
Why a fixed-direction tilt cannot estimate the large-deviation probability.

The importance weights of the tilt (θ, e) have log-likelihood ratio close to
-θ²N - θ√(2N) Z with Z standard normal, so their spread grows like √N and the
effective sample size collapses.  The script prints the effective sample size
and the naive estimate of -(1/N) log P(λ_max in [2.4, 2.6]) for growing N,
beside the GOE target, and reports when the estimator declares the weights
degenerate.

Run with ``python3 demos/tilted_sampling.py``.
"""

from __future__ import annotations

from wigner_ldp.errors import DegenerateWeights
from wigner_ldp.freeprob import i_goe
from wigner_ldp.laws import gaussian
from wigner_ldp.montecarlo import tail_estimate_direct, tail_estimate_tilted


def main() -> None:
    print(f"target I_GOE(2.5) = {float(i_goe(2.5)):.4f}")
    p, se = tail_estimate_direct(gaussian(), 10, 2.5, 4000, seed=1)
    print(f"direct sampling, N = 10: P(λ_max >= 2.5) = {p:.4f} ± {se:.4f}")
    for N in (10, 20, 50, 100):
        try:
            t = tail_estimate_tilted(gaussian(), N, 2.5, 1.0, 500, seed=2)
            print(f"N = {N:>3}: -(1/N) log P = {t.log_p_per_N:.4f} ± {t.stderr:.4f}, ESS = {t.ess:.1f}")
        except DegenerateWeights as exc:
            print(f"N = {N:>3}: degenerate weights ({exc})")


if __name__ == "__main__":
    main()
