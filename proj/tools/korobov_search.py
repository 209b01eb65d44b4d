#!/usr/bin/env python3
"""Korobov generating vector q_j = a^(j-1) mod N for a rank-1 lattice.

The multiplier a is chosen from random odd candidates by the weighted P_2
criterion summed (in log) over the embedded sizes N = 2^m_min .. 2^m_max.
"""
import argparse

import numpy as np


def p2(q, n, gamma):
    i = np.arange(n, dtype=np.int64)
    prod = np.ones(n)
    for qj, gj in zip(q, gamma):
        x = (i * (int(qj) % n)) % n / n
        prod *= 1.0 + gj * 2.0 * np.pi**2 * (x * x - x + 1.0 / 6.0)
    return prod.mean() - 1.0


def korobov(a, dim, n):
    q = [1]
    for _ in range(dim - 1):
        q.append(q[-1] * a % n)
    return q


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--m-min", type=int, default=10)
    ap.add_argument("--m-max", type=int, default=20)
    ap.add_argument("--candidates", type=int, default=256)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    n = 1 << args.m_max
    gamma = [1.0 / (j + 1) ** 2 for j in range(args.dim)]
    rng = np.random.default_rng(args.seed)
    cands = rng.integers(1, n // 2, size=args.candidates) * 2 + 1
    best = None
    for a in cands:
        q = korobov(int(a), args.dim, n)
        score = sum(np.log(p2(q, 1 << m, gamma)) for m in range(args.m_min, args.m_max + 1))
        if best is None or score < best[0]:
            best = (score, int(a), q)
    score, a, q = best
    with open(args.out, "w") as f:
        f.write(f"# dim={args.dim} n={n}\n")
        f.write(f"# korobov a={a} gamma_j=1/j^2 log-P2 sum={score:.6f}\n")
        for v in q:
            f.write(f"{v}\n")
    print(f"a={a} score={score:.6f}")


if __name__ == "__main__":
    main()
