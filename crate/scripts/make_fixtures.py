#!/usr/bin/env python3
"""Regenerate the PARI/GP reference fixtures used by the ecrank-core tests.

Requires cypari2. The output is written to crates/core/tests/data/pari_curves.json
and is committed, so the Rust test suite never needs PARI at run time.
"""
import json
import random
import sys
from pathlib import Path

import cypari2

pari = cypari2.Pari()
pari.allocatemem(1 << 30)

AP_BOUND = 500
OUT = Path(__file__).resolve().parent.parent / "crates/core/tests/data/pari_curves.json"


def describe(ainvs, tag):
    E = pari.ellinit(ainvs)
    if len(E) == 0:
        return None
    gr = pari.ellglobalred(E)
    N = int(gr[0])
    Emin = pari.ellminimalmodel(E)
    disc = int(E.disc())
    fac = pari.factor(abs(disc))
    local = {}
    for row in range(len(fac[0])):
        p = int(fac[0][row])
        lr = pari.elllocalred(E, p)
        local[str(p)] = {"f": int(lr[0]), "kodaira": int(lr[1]), "cp": int(lr[3])}
    aps = [int(pari.ellap(Emin, p)) for p in pari.primes([2, AP_BOUND - 1])]
    tors = int(pari.elltors(E)[0])
    return {
        "tag": tag,
        "ainvs": [str(int(a)) for a in ainvs],
        "disc": str(disc),
        "conductor": str(N),
        "minimal": [str(int(Emin[i])) for i in range(5)],
        "torsion": tors,
        "local": local,
        "aps": aps,
    }


def main():
    rng = random.Random(20240611)
    out = []
    named = {
        "11a1": [0, -1, 1, -10, -20],
        "37a1": [0, 0, 1, -1, 0],
        "389a1": [0, 1, 1, -2, 0],
        "5077a1": [0, 0, 1, -7, 6],
        "27a3": [0, 0, 1, 0, 0],
        "x3p1": [0, 0, 0, 0, 1],
        "x3mx": [0, 0, 0, -1, 0],
    }
    for tag, a in named.items():
        out.append(describe(a, tag))

    # Plain random reduced models.
    while sum(1 for c in out if c["tag"] == "random") < 150:
        a = [rng.randint(0, 1), rng.randint(-1, 1), rng.randint(0, 1),
             rng.randint(-1000, 1000), rng.randint(-1000, 1000)]
        d = describe(a, "random")
        if d:
            out.append(d)

    # Models with heavy 2- and 3-adic structure: exercises every branch of the
    # local algorithm at p = 2, 3.
    while sum(1 for c in out if c["tag"] == "adic23") < 150:
        a = []
        for i in range(5):
            e2 = rng.randint(0, 6)
            e3 = rng.randint(0, 4)
            a.append(rng.randint(-9, 9) * 2 ** e2 * 3 ** e3)
        d = describe(a, "adic23")
        if d:
            out.append(d)

    # Non-minimal models: scale random curves by u.
    while sum(1 for c in out if c["tag"] == "scaled") < 80:
        base = [rng.randint(-3, 3), rng.randint(-3, 3), rng.randint(-3, 3),
                rng.randint(-50, 50), rng.randint(-50, 50)]
        u = rng.choice([2, 3, 4, 5, 6, 7, 12])
        a = [base[0] * u, base[1] * u ** 2, base[2] * u ** 3, base[3] * u ** 4, base[4] * u ** 6]
        d = describe(a, "scaled")
        if d:
            out.append(d)

    # Curves with rational torsion from standard families.
    while sum(1 for c in out if c["tag"] == "torsion") < 40:
        b = rng.randint(-30, 30)
        c = rng.randint(-30, 30)
        # Tate normal form E(b, c): (0,0) has order > 1.
        a = [1 - c, -b, -b, 0, 0]
        d = describe(a, "torsion")
        if d:
            out.append(d)

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"ap_bound": AP_BOUND, "curves": out}, indent=None))
    print(f"wrote {len(out)} curves to {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()
