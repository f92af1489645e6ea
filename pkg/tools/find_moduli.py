#!/usr/bin/env python3
"""Search for sparse irreducible GF(2) moduli and print table entries
for qkdsim.gf2._MODULUS_TABLE.  Usage: find_moduli.py DEGREE [DEGREE...]"""

import sys
import time

sys.path.insert(0, "src")

from qkdsim.gf2 import _search_modulus, is_irreducible  # noqa: E402


def main() -> None:
    for arg in sys.argv[1:]:
        n = int(arg)
        t0 = time.time()
        exps = _search_modulus(n)
        assert is_irreducible(exps)
        print(f"{exps},  # degree {n}, {time.time() - t0:.1f}s", flush=True)


if __name__ == "__main__":
    main()
