"""Item kNN, shrunk cosine variant: a wide neighborhood whose similarities
are damped by a shrinkage term so rarely co-rated pairs count less."""

import math

NEIGHBORHOOD = 100
SHRINKAGE = 100.0


def cosine(users_a, users_b):
    overlap = len(users_a & users_b)
    if overlap == 0:
        return 0.0
    norm = math.sqrt(len(users_a)) * math.sqrt(len(users_b))
    return overlap / (norm + SHRINKAGE)


def fit(train):
    consumers = {}
    for user, item, _, _ in train:
        if item not in consumers:
            consumers[item] = set()
        consumers[item].add(user)
    catalog = sorted(consumers)
    neighbors = {}
    for a in catalog:
        candidates = []
        for b in catalog:
            if a == b:
                continue
            s = cosine(consumers[a], consumers[b])
            if s > 0.0:
                candidates.append((b, s))
        candidates.sort(key=lambda pair: (-pair[1], pair[0]))
        neighbors[a] = candidates[:NEIGHBORHOOD]
    return neighbors


def score_one(neighbors, history, item):
    total = 0.0
    for seed in history:
        for other, s in neighbors.get(seed, []):
            if other == item:
                total += s
    return total


def recommend(neighbors, history, k):
    catalog = set(neighbors) - set(history)
    scored = [(score_one(neighbors, history, item), item) for item in catalog]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [item for _, item in scored[:k]]
