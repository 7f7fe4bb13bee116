"""Labeled curve slice for end-to-end runs.

Random reduced-form models with |a4|, |a6| <= 300, replaced by their global
minimal model, kept when the conductor is below 10^6, deduplicated, and
labeled with PARI's analytic rank. Needs cypari2.

    python3 scripts/make_labeled.py data/curves_n1e6.csv 24000
"""
import csv
import random
import sys

import cypari2

pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)


def main(out_path, count, seed=20240601):
    rng = random.Random(seed)
    seen = set()
    rows = []
    while len(rows) < count:
        a = [rng.randint(0, 1), rng.randint(-1, 1), rng.randint(0, 1),
             rng.randint(-300, 300), rng.randint(-300, 300)]
        try:
            e = pari.ellinit(a)
        except cypari2.PariError:
            continue
        if len(e) == 0 or e[11] == 0:
            continue
        e = pari.ellminimalmodel(e)
        n = int(pari.ellglobalred(e)[0])
        if n >= 10**6:
            continue
        ainvs = tuple(int(x) for x in e[:5])
        if ainvs in seen:
            continue
        seen.add(ainvs)
        rank = int(pari.ellanalyticrank(e)[0])
        rows.append((f"c{len(rows)}", *ainvs, n, rank))
    with open(out_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "a1", "a2", "a3", "a4", "a6", "conductor", "rank"])
        w.writerows(rows)


if __name__ == "__main__":
    main(sys.argv[1], int(sys.argv[2]))
