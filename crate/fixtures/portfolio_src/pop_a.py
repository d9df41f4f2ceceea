"""Most-popular recommender: rank items by raw interaction count."""


def fit(train):
    counts = {}
    for user, item, _, _ in train:
        counts[item] = counts.get(item, 0) + 1
    return counts


def recommend(counts, history, k):
    ranked = sorted(counts, key=lambda i: (-counts[i], i))
    out = []
    for item in ranked:
        if item in history:
            continue
        out.append(item)
        if len(out) == k:
            break
    return out
