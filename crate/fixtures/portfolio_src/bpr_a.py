"""Bayesian personalized ranking with small factors and a fast schedule."""

import math
import random

DIM = 32
LEARNING_RATE = 0.05
REG = 0.01
EPOCHS = 30


def fit(train, n_users, n_items, seed):
    rng = random.Random(seed)
    scale = 1.0 / math.sqrt(DIM)
    user_f = [[rng.gauss(0, scale) for _ in range(DIM)] for _ in range(n_users)]
    item_f = [[rng.gauss(0, scale) for _ in range(DIM)] for _ in range(n_items)]
    positives = {}
    for user, item, _, _ in train:
        positives.setdefault(user, set()).add(item)
    pairs = [(u, i) for u, items in positives.items() for i in items]
    for _ in range(EPOCHS):
        rng.shuffle(pairs)
        for u, pos in pairs:
            neg = rng.randrange(n_items)
            while neg in positives[u]:
                neg = rng.randrange(n_items)
            x = sum(user_f[u][d] * (item_f[pos][d] - item_f[neg][d]) for d in range(DIM))
            g = 1.0 / (1.0 + math.exp(x))
            for d in range(DIM):
                uf, pf, nf = user_f[u][d], item_f[pos][d], item_f[neg][d]
                user_f[u][d] += LEARNING_RATE * (g * (pf - nf) - REG * uf)
                item_f[pos][d] += LEARNING_RATE * (g * uf - REG * pf)
                item_f[neg][d] += LEARNING_RATE * (-g * uf - REG * nf)
    return user_f, item_f


def recommend(model, user, history, k):
    user_f, item_f = model
    scores = []
    for item in range(len(item_f)):
        if item in history:
            continue
        s = sum(user_f[user][d] * item_f[item][d] for d in range(DIM))
        scores.append((-s, item))
    scores.sort()
    return [item for _, item in scores[:k]]
