"""Factorized personalized Markov chain: pairwise ranking over adjacent
(previous item, next item) transitions, conditioned on the last seen item."""

import math
import random

DIM = 16
LR = 0.05
REG = 0.01
EPOCHS = 30


def build_triples(train):
    history = {}
    for user, item, t, _ in sorted(train, key=lambda row: row[2]):
        history.setdefault(user, []).append(item)
    triples = []
    for user, items in history.items():
        for prev, nxt in zip(items, items[1:]):
            triples.append((user, prev, nxt))
    return triples, history


def init_factors(n, dim, rng):
    return [[rng.gauss(0.0, 0.1) for _ in range(dim)] for _ in range(n)]


def fit(train, n_users, n_items, seed):
    rng = random.Random(seed)
    vu = init_factors(n_users, DIM, rng)
    vi = init_factors(n_items, DIM, rng)
    vl = init_factors(n_items, DIM, rng)
    vn = init_factors(n_items, DIM, rng)
    triples, history = build_triples(train)
    for _ in range(EPOCHS):
        rng.shuffle(triples)
        for user, prev, nxt in triples:
            neg = rng.randrange(n_items)
            if neg == nxt:
                continue
            x_pos = score(vu, vi, vl, vn, user, prev, nxt)
            x_neg = score(vu, vi, vl, vn, user, prev, neg)
            g = 1.0 / (1.0 + math.exp(x_pos - x_neg))
            for d in range(DIM):
                du = vi[nxt][d] - vi[neg][d]
                vu[user][d] += LR * (g * du - REG * vu[user][d])
                vi[nxt][d] += LR * (g * vu[user][d] - REG * vi[nxt][d])
                vi[neg][d] += LR * (-g * vu[user][d] - REG * vi[neg][d])
                dl = vn[nxt][d] - vn[neg][d]
                vl[prev][d] += LR * (g * dl - REG * vl[prev][d])
                vn[nxt][d] += LR * (g * vl[prev][d] - REG * vn[nxt][d])
                vn[neg][d] += LR * (-g * vl[prev][d] - REG * vn[neg][d])
    return (vu, vi, vl, vn), history


def score(vu, vi, vl, vn, user, prev, item):
    mf = sum(a * b for a, b in zip(vu[user], vi[item]))
    mc = sum(a * b for a, b in zip(vl[prev], vn[item]))
    return mf + mc


def recommend(model, user, history, k):
    factors, chains = model
    vu, vi, vl, vn = factors
    last = chains[user][-1]
    scored = []
    for item in range(len(vi)):
        if item in history:
            continue
        scored.append((-score(vu, vi, vl, vn, user, last, item), item))
    scored.sort()
    return [item for _, item in scored[:k]]
