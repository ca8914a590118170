"""
Rate functions of the top eigenvalue for several entry laws.

Prints, for each builtin law, its tail constants and classification, then the
rate function I(x) next to the GOE rate on a few points.  Heavier-tailed
laws (A > 1) sit below the GOE curve once x leaves the window where the GOE
rate is still exact, and grow like x²/(4A) far out.

Run with ``python3 demos/rate_functions.py``.
"""

from __future__ import annotations

import numpy as np

from wigner_ldp.freeprob import i_goe
from wigner_ldp.laws import builtin_laws, classify, tail_constants
from wigner_ldp.rate import goe_window, rate_curve


def main() -> None:
    xs = np.array([2.0, 2.1, 2.5, 3.0, 4.0, 6.0, 10.0])
    print("x        " + "  ".join(f"{x:>8.2f}" for x in xs))
    print("I_GOE    " + "  ".join(f"{float(i_goe(x)):>8.4f}" for x in xs))
    for name, law in builtin_laws().items():
        tc = tail_constants(law)
        curve = rate_curve(law, xs)
        window = goe_window(tc.A)
        print(f"\n{name}: A = {tc.A:.4f}, B = {tc.B:.4f}, class = {classify(law).tag.value}")
        if window:
            print(f"  GOE rate exact on [{window[0]:.4f}, {window[1]:.4f}]")
        print("  I      " + "  ".join(f"{float(v):>8.4f}" for v in curve.values))
        far = float(curve.values[-1]) * 4.0 * tc.A / xs[-1] ** 2
        print(f"  I(10)·4A/100 = {far:.4f}  (tends to 1 as x grows)")


if __name__ == "__main__":
    main()
