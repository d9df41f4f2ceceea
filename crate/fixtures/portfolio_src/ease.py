"""EASE: closed-form shallow autoencoder. B = I - P diag(1 / diag(P)) with
P = (X^T X + lambda I)^-1 and a zero diagonal constraint."""

LAMBDA = 100.0


def gram(train, n_items):
    g = [[0.0] * n_items for _ in range(n_items)]
    baskets = {}
    for user, item, _, _ in train:
        baskets.setdefault(user, set()).add(item)
    for items in baskets.values():
        for a in items:
            for b in items:
                g[a][b] += 1.0
    return g


def invert(m):
    """Gauss-Jordan inverse."""
    n = len(m)
    aug = [row[:] + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(aug[r][col]))
        aug[col], aug[pivot] = aug[pivot], aug[col]
        scale = aug[col][col]
        aug[col] = [v / scale for v in aug[col]]
        for r in range(n):
            if r == col:
                continue
            f = aug[r][col]
            aug[r] = [v - f * p for v, p in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def fit(train, n_items):
    g = gram(train, n_items)
    for i in range(n_items):
        g[i][i] += LAMBDA
    p = invert(g)
    b = [[0.0] * n_items for _ in range(n_items)]
    for i in range(n_items):
        for j in range(n_items):
            if i == j:
                continue
            b[i][j] = -p[i][j] / p[j][j]
    return b


def recommend(b, history, k):
    n = len(b)
    scored = []
    for item in range(n):
        if item in history:
            continue
        s = sum(b[seen][item] for seen in history)
        scored.append((-s, item))
    scored.sort()
    return [item for _, item in scored[:k]]
