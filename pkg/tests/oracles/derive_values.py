"""Independent oracle computations whose outputs are frozen into the tests.

Run with: python3 tests/oracles/derive_values.py

Everything here is computed straight from the defining formulas with
plain python/numpy, without importing the package under test.
"""

import math

import numpy as np


def kde(samples, x, h):
    total = sum(math.exp(-((x - s) ** 2) / (2 * h * h)) for s in samples)
    return total / (len(samples) * h * math.sqrt(2 * math.pi))


def main() -> None:
    print("# kernel density constants")
    print("phi0 =", kde([0.0], 0.0, 1.0))  # 1/sqrt(2*pi)
    print("two_sample_at_zero =", kde([-1.0, 1.0], 0.0, 1.0))

    print("# entropy of four identical samples, h = 1")
    p = kde([5.0] * 4, 5.0, 1.0)
    print("plogp_four_identical =", -4 * p * math.log(p))
    print("resub_four_identical =", -math.log(p))

    print("# silverman width for {-1, +1}")
    sd = math.sqrt(2.0)  # sample std, ddof=1
    q75, q25 = np.percentile([-1.0, 1.0], [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    print("silverman_pm1 =", max(1e-6, 0.9 * spread * 2 ** (-0.2)))

    print("# analytic entropy of a unit gaussian")
    print("gauss_entropy =", 0.5 * math.log(2 * math.pi * math.e))

    print("# downsample paths traced from the stepping rule")

    def trace(t, n, casual, r_low, r_high):
        out, i = [], t
        while True:
            hi = i + r_high
            if hi <= n and all(casual[j] for j in range(i, hi + 1)):
                step = r_high
            else:
                step = r_low
            if i + step > n:
                break
            i += step
            out.append(i)
        return out

    all_casual_9 = {j: True for j in range(1, 10)}
    print("path_allC_T9_r2 =", trace(1, 9, all_casual_9, 1, 2))
    split_10 = {j: j <= 5 for j in range(1, 11)}
    print("path_split_T10 =", trace(1, 10, split_10, 1, 2))

    print("# transition-ratio speedups")
    allc_101 = {j: True for j in range(1, 102)}
    path = trace(1, 101, allc_101, 2, 4)
    print("allC_T101_L =", 1 + len(path), "ratio =", 100 / len(path))

    print("# chunk recommendations, half-up rounding")
    for k, s in ((48, 2.0), (16, 2.0), (50, 2.0)):
        print(f"chunk_{k}_at_{s} =", max(1, math.floor(k / s + 0.5)))


if __name__ == "__main__":
    main()
