#!/usr/bin/env python3
"""Generate the synthetic review fixture used by the tests.

Writes <out>/fixture.jsonl (64 EDU-segmented reviews with 1..5 star labels)
and <out>/lexicon.tsv. Output is fully determined by --seed.
"""
import argparse
import json
import os
import random

POSITIVE = {"great": 1.0, "delicious": 1.0, "amazing": 1.0, "friendly": 0.5, "fresh": 0.5,
            "nice": 0.5, "tasty": 0.5, "perfect": 1.0, "cozy": 0.5, "excellent": 1.0}
NEGATIVE = {"awful": -1.0, "rude": -1.0, "bland": -0.5, "slow": -0.5, "cold": -0.5,
            "terrible": -1.0, "dirty": -1.0, "overpriced": -0.5, "soggy": -0.5, "horrible": -1.0}
NOUNS = ["food", "service", "pizza", "staff", "waiter", "pasta", "burger", "coffee", "dessert",
         "patio", "menu", "soup", "salad", "bartender", "fries", "steak", "owner", "music"]
PLACES = ["mall", "station", "park", "office", "hotel", "river", "campus", "theater"]
DAYS = ["monday", "tuesday", "friday", "saturday", "sunday", "holiday", "birthday"]
ADVERBS = ["really", "very", "quite", "so", "pretty", "incredibly"]
CONNECTIVES = ["but", "and", "although", "because", "however", "also", "then"]

# fraction of opinionated EDUs that are positive, per star label
POSITIVE_SHARE = {1: 0.0, 2: 0.25, 3: 0.5, 4: 0.75, 5: 1.0}


def opinion(rng, positive):
    adj = rng.choice(sorted(POSITIVE if positive else NEGATIVE))
    noun = rng.choice(NOUNS)
    forms = [
        ["the", noun, "was", adj],
        ["the", noun, "was", rng.choice(ADVERBS), adj],
        [rng.choice(ADVERBS), adj, noun],
        ["we", "found", "the", noun, adj, "tonight"],
        ["their", noun, "is", "always", adj],
    ]
    edu = rng.choice(forms)
    if rng.random() < 0.4:
        edu = [rng.choice(CONNECTIVES)] + edu
    return edu


def neutral(rng):
    forms = [
        ["we", "came", "here", "on", "a", rng.choice(DAYS)],
        ["it", "is", "near", "the", rng.choice(PLACES)],
        ["i", "ordered", "the", rng.choice(NOUNS), "and", "the", rng.choice(NOUNS)],
        ["my", "friend", "had", "the", rng.choice(NOUNS)],
        ["parking", "is", "next", "to", "the", rng.choice(PLACES), "on", "the", "left", "side"],
    ]
    return rng.choice(forms)


def review(rng, doc_id, label):
    n_edus = rng.choice([1, 2, 3, 3, 4, 4, 5, 5, 6, 7, 8, 10, 12, 14])
    edus = []
    for _ in range(n_edus):
        if rng.random() < 0.3:
            edus.append(neutral(rng))
        else:
            edus.append(opinion(rng, rng.random() < POSITIVE_SHARE[label]))
    return {"id": doc_id, "label": label, "edus": edus}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "data"))
    ap.add_argument("--docs", type=int, default=64)
    ap.add_argument("--seed", type=int, default=2020)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "fixture.jsonl"), "w") as f:
        for i in range(args.docs):
            label = i % 5 + 1
            f.write(json.dumps(review(rng, "r%03d" % (i + 1), label), separators=(",", ":")) + "\n")
    with open(os.path.join(args.out, "lexicon.tsv"), "w") as f:
        for word, pol in sorted({**POSITIVE, **NEGATIVE}.items()):
            f.write("%s\t%g\n" % (word, pol))


if __name__ == "__main__":
    main()
