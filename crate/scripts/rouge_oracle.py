#!/usr/bin/env python3
"""Independent ROUGE-1/2/L F1 reference values for the step-distance fixtures.

Uses exact rational arithmetic and the precision/recall form of F1. Tokens are
lowercased runs of alphanumeric characters.

    python3 scripts/rouge_oracle.py > fixtures/rouge_fixtures.json
"""

import json
import random
import re
from collections import Counter
from fractions import Fraction


def tokens(text):
    return re.findall(r"[^\W_]+", text.lower())


def ngrams(toks, n):
    return Counter(tuple(toks[i:i + n]) for i in range(len(toks) - n + 1))


def f1(overlap, cand_total, ref_total):
    if overlap == 0:
        return Fraction(0)
    p = Fraction(overlap, cand_total)
    r = Fraction(overlap, ref_total)
    return 2 * p * r / (p + r)


def rouge_n(cand, ref, n):
    c, r = ngrams(cand, n), ngrams(ref, n)
    ct, rt = sum(c.values()), sum(r.values())
    if ct == 0 and rt == 0:
        return Fraction(1 if cand == ref else 0)
    if ct == 0 or rt == 0:
        return Fraction(0)
    return f1(sum((c & r).values()), ct, rt)


def lcs(a, b):
    # Memoized recursion; independent of the iterative table in the crate.
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    return go(0, 0)


def rouge_l(cand, ref):
    if not cand and not ref:
        return Fraction(1)
    if not cand or not ref:
        return Fraction(0)
    return f1(lcs(cand, ref), len(cand), len(ref))


HAND = [
    ("The red ball rolls left.", "The red ball rolls left."),
    ("The ball rolls.", "The red ball rolls left."),
    ("A man opens the door.", "The door is opened by a man."),
    ("the the the cat", "the cat the"),
    ("Water boils.", "Ice melts."),
    ("Stop.", "Stop."),
    ("Stop.", "Go."),
    ("The glass falls and breaks on the floor.", "The glass breaks."),
    ("He turns LEFT at the light.", "he turns left at the LIGHT"),
    ("It moves 3 meters in 2 seconds.", "It moves 2 meters in 3 seconds."),
    ("Dog-friendly park, open late.", "The park is open late for dogs."),
    ("A B C D E F", "F E D C B A"),
]

VOCAB = "the a cup ball dog falls rolls table floor man woman opens door car stops moves left right red blue".split()


def random_pairs(count, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        a = " ".join(rng.choice(VOCAB) for _ in range(rng.randint(1, 9))) + "."
        b = " ".join(rng.choice(VOCAB) for _ in range(rng.randint(1, 9))) + "."
        out.append((a, b))
    return out


def main():
    cases = []
    for gen, ref in HAND + random_pairs(20 - len(HAND), 20240611):
        g, r = tokens(gen), tokens(ref)
        r1, r2, rl = rouge_n(g, r, 1), rouge_n(g, r, 2), rouge_l(g, r)
        dist = 1 - (r1 + r2 + rl) / 3
        cases.append({
            "generated": gen,
            "reference": ref,
            "rouge1": float(r1),
            "rouge2": float(r2),
            "rougeL": float(rl),
            "distance": float(dist),
            "distance_exact": f"{dist.numerator}/{dist.denominator}",
        })
    print(json.dumps(cases, indent=2))


if __name__ == "__main__":
    main()
