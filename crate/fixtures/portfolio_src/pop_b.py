"""Rating-damped popularity: each event contributes its rating divided by
the item's raw count, favoring items that are liked, not just clicked."""


def fit(train):
    raw = {}
    rating_sum = {}
    for user, item, _, rating in train:
        raw[item] = raw.get(item, 0) + 1
        rating_sum[item] = rating_sum.get(item, 0.0) + rating
    scores = {}
    for item in raw:
        scores[item] = rating_sum[item] / raw[item]
    return scores


def top_k(scores, exclude, k):
    kept = [(item, s) for item, s in scores.items() if item not in exclude]
    kept.sort(key=lambda pair: (-pair[1], pair[0]))
    result = []
    idx = 0
    while idx < len(kept) and len(result) < k:
        result.append(kept[idx][0])
        idx += 1
    return result


def recommend(model, history, k):
    return top_k(model, set(history), k)
