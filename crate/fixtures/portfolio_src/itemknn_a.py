"""Item-based kNN with cosine similarity and a small neighborhood."""

import math

TOP_N = 20


def fit(train):
    users_of = {}
    for user, item, _, _ in train:
        users_of.setdefault(item, set()).add(user)
    sims = {}
    items = sorted(users_of)
    for a in items:
        row = []
        for b in items:
            if a == b:
                continue
            shared = len(users_of[a] & users_of[b])
            if shared == 0:
                continue
            denom = math.sqrt(len(users_of[a]) * len(users_of[b]))
            row.append((b, shared / denom))
        row.sort(key=lambda pair: (-pair[1], pair[0]))
        sims[a] = row[:TOP_N]
    return sims


def recommend(sims, history, k):
    scores = {}
    for seed in history:
        for item, s in sims.get(seed, []):
            if item in history:
                continue
            scores[item] = scores.get(item, 0.0) + s
    ranked = sorted(scores, key=lambda i: (-scores[i], i))
    return ranked[:k]
