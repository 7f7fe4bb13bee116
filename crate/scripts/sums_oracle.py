"""Reference values for the Mestre-Nagao sums on curves of rank 0..3.

a_p come from PARI (ellap); every sum and the digamma integral are evaluated
independently in mpmath at 25 digits.
"""
import json
import sys

import cypari2
import mpmath as mp

mp.mp.dps = 25
pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)

CURVES = {
    "11a1": [0, -1, 1, -10, -20],
    "37a1": [0, 0, 1, -1, 0],
    "389a1": [0, 1, 1, -2, 0],
    "5077a1": [0, 0, 1, -7, 6],
}
B = 10**5
DELTAS = [0.5, 1.0, 1.5, 2.0]


def integral(delta):
    d = mp.mpf(delta)
    a = d * mp.pi

    def f(t):
        if t == 0:
            return mp.re(mp.digamma(1))
        return mp.re(mp.digamma(1 + 1j * t)) * (mp.sin(a * t) / (a * t)) ** 2

    # one period per panel out to T = 2000/delta; beyond that only the
    # non-oscillating part of log(t) sin^2/(a t)^2 matters at this precision
    periods = 2000
    body = mp.fsum(mp.quad(f, [k / d, (k + 1) / d]) for k in range(periods))
    t = periods / d
    tail = ((mp.log(t) + 1) / t + 1 / (36 * t**3)) / (2 * a * a)
    return 2 / mp.pi * (body + tail)


def main(out):
    plimit = int(mp.floor(mp.exp(2 * mp.pi * max(DELTAS))))
    primes = [int(p) for p in pari.primes([2, plimit])]
    ints = {d: integral(d) for d in DELTAS}
    result = {"B": B, "integral": {str(d): mp.nstr(v, 20) for d, v in ints.items()}, "curves": {}}
    for tag, ainvs in CURVES.items():
        E = pari.ellinit(ainvs)
        N = int(pari.ellglobalred(E)[0])
        bad = {int(p) for p in pari.factor(N)[0]}
        ap = {p: int(pari.ellap(E, p)) for p in primes}
        logB = mp.log(B)
        good = [p for p in primes if p < B and p not in bad]

        s0 = mp.fsum(ap[p] * mp.log(p) / p for p in good) / logB

        def cn(p, m):
            a = ap[p]
            if p in bad:
                return mp.mpf(a) ** m
            prev, cur = 2, a
            for _ in range(m - 1):
                prev, cur = cur, cur * a - p * prev
            return mp.mpf(cur)

        terms = []
        for p in primes:
            if p > B:
                break
            m, q = 1, p
            while q <= B:
                terms.append((q, cn(p, m), mp.log(p)))
                m, q = m + 1, q * p
        plain = mp.fsum(c * l for _, c, l in terms)
        weighted = mp.fsum(c * l / n for n, c, l in terms)
        s1 = s0 - plain / (B * logB)
        s2 = weighted / logB - plain / (B * logB)
        s3 = mp.fsum((2 - ap[p]) * mp.log(p) / (p + 1 - ap[p]) for p in good)
        s4 = mp.fsum(-ap[p] * mp.log(p) for p in good) / B
        split = [p for p in primes if p < B and p in bad and ap[p] == 1]
        s5 = mp.fsum(mp.log(mp.mpf(p + 1 - ap[p]) / p) for p in good) + mp.fsum(
            mp.log(mp.mpf(3) / 2 * (p - 1) / p) for p in split
        )
        s6 = {}
        for d in DELTAS:
            x = 2 * mp.pi * d
            tot = []
            for p in primes:
                lp = mp.log(p)
                if lp > x:
                    break
                k = 1
                while k * lp <= x:
                    # c_{p^k} are unnormalized (abs(alpha) = sqrt p), so divide by p^k
                    tot.append(lp * cn(p, k) / mp.power(p, k) * (1 - k * lp / x))
                    k += 1
            val = mp.log(N) / (2 * d * mp.pi) - mp.log(2 * mp.pi) / (d * mp.pi) - mp.fsum(tot) / (d * mp.pi) + ints[d]
            s6[str(d)] = mp.nstr(val, 20)
        result["curves"][tag] = {
            "ainvs": ainvs,
            "conductor": N,
            "rank": int(pari.ellanalyticrank(E)[0]),
            "S": [mp.nstr(v, 20) for v in (s0, s1, s2, s3, s4, s5)],
            "S6": s6,
        }
        print(tag, result["curves"][tag], file=sys.stderr)
    with open(out, "w") as fh:
        json.dump(result, fh, indent=1)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/data/sums_oracle.json")
