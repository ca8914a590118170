"""
The outlier transition under an exponential tilt.

Tilting a Gaussian Wigner matrix by e^{θN<e,Xe>} adds a rank-one spike of
strength 2θ along e.  Below 2θ = 1 the top eigenvalue sticks to the bulk
edge 2; above it an outlier appears at 2θ + 1/(2θ) with squared overlap
1 - 1/(2θ)².  This script compares sample means at N = 200 with those values.

Run with ``python3 demos/bbp_transition.py``.
"""

from __future__ import annotations

from wigner_ldp.laws import gaussian
from wigner_ldp.montecarlo import bbp_experiment


def main() -> None:
    print(f"{'theta':>6} {'lambda':>8} {'pred':>8} {'overlap':>8} {'pred':>8}")
    for theta in (0.2, 0.4, 0.6, 0.8, 1.0, 1.5):
        s = bbp_experiment(gaussian(), 200, theta, n_samples=20, seed=7)
        print(f"{theta:>6.2f} {s.mean_lambda:>8.4f} {s.predicted_lambda:>8.4f} "
              f"{s.mean_overlap:>8.4f} {s.predicted_overlap:>8.4f}")


if __name__ == "__main__":
    main()
