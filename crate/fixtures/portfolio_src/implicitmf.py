"""Implicit-feedback matrix factorization via alternating least squares
with confidence weighting c = 1 + alpha * r."""

DIM = 32
REG = 0.1
ALPHA = 40.0
SWEEPS = 15


def transpose(m):
    return [list(row) for row in zip(*m)]


def matmul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def solve(a, b):
    """Gaussian elimination with partial pivoting on a copy of (a | b)."""
    n = len(a)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(m[r][col]))
        m[col], m[pivot] = m[pivot], m[col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            for c in range(col, n + 1):
                m[r][c] -= f * m[col][c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        x[r] = (m[r][n] - sum(m[r][c] * x[c] for c in range(r + 1, n))) / m[r][r]
    return x


def ls_step(fixed, ratings_of, n_rows):
    gram = matmul(transpose(fixed), fixed)
    for d in range(DIM):
        gram[d][d] += REG
    updated = []
    for row in range(n_rows):
        a = [grow[:] for grow in gram]
        b = [0.0] * DIM
        for other, r in ratings_of.get(row, []):
            conf = 1.0 + ALPHA * r
            f = fixed[other]
            for d1 in range(DIM):
                b[d1] += conf * f[d1]
                for d2 in range(DIM):
                    a[d1][d2] += (conf - 1.0) * f[d1] * f[d2]
        updated.append(solve(a, b))
    return updated


def fit(train, n_users, n_items, init):
    user_f, item_f = init
    by_user = {}
    by_item = {}
    for user, item, _, rating in train:
        by_user.setdefault(user, []).append((item, rating))
        by_item.setdefault(item, []).append((user, rating))
    for _ in range(SWEEPS):
        user_f = ls_step(item_f, by_user, n_users)
        item_f = ls_step(user_f, by_item, n_items)
    return user_f, item_f


def recommend(model, user, history, k):
    user_f, item_f = model
    scored = []
    for item, f in enumerate(item_f):
        if item in history:
            continue
        scored.append((-sum(a * b for a, b in zip(user_f[user], f)), item))
    scored.sort()
    return [item for _, item in scored[:k]]
