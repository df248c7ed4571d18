#!/usr/bin/env python3
"""Reference scenario generator: MT19937-64 plus the documented draw order.

Independent of the C++ code; used to check that scenarios are reproducible
from the seed alone.

    python3 tools/reference_generator.py --seed 42 --sellers 3 --buyers 4
"""
import argparse
import json


class MT19937_64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & 0xFFFFFFFFFFFFFFFF
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & 0xFFFFFFFFFFFFFFFF
        self.index = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.index = 0

    def __call__(self):
        if self.index >= 312:
            self._twist()
        y = self.mt[self.index]
        self.index += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & 0xFFFFFFFFFFFFFFFF


def draw_range(x, lo, hi):
    return lo + ((x * (hi - lo + 1)) >> 64)


def coordinate(x, area):
    return (x >> 11) * 2.0**-53 * area


def generate(seed, sellers, buyers, area=2000.0, s_max=150, b_max=50, c_max=10, d_max=10):
    root = MT19937_64(seed)
    srng = MT19937_64(root())
    brng = MT19937_64(root())
    out = {"sellers": [], "buyers": []}
    for i in range(sellers):
        s = draw_range(srng(), 1, s_max)
        c = draw_range(srng(), 1, c_max)
        out["sellers"].append({"id": i + 1, "s": s, "c": c})
    for i in range(buyers):
        x = coordinate(brng(), area)
        y = coordinate(brng(), area)
        b = draw_range(brng(), 1, b_max)
        d = draw_range(brng(), 1, d_max)
        out["buyers"].append({"id": i + 1, "x": x, "y": y, "b": b, "d": d})
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--sellers", type=int, default=10)
    ap.add_argument("--buyers", type=int, default=50)
    args = ap.parse_args()
    print(json.dumps(generate(args.seed, args.sellers, args.buyers), indent=2))
