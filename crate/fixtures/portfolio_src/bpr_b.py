"""BPR, wide-and-slow variant: doubled factor dimension, a 5x smaller
learning rate, lighter regularization, and a longer schedule. Sampling
logic is shared in spirit with the fast variant but written standalone."""

import math
import random


class BprWide:
    dim = 64
    lr = 0.01
    reg = 0.001
    epochs = 50

    def __init__(self, n_users, n_items, seed):
        rng = random.Random(seed)
        sd = 1.0 / math.sqrt(self.dim)
        self.rng = rng
        self.p = [[rng.gauss(0.0, sd) for _ in range(self.dim)] for _ in range(n_users)]
        self.q = [[rng.gauss(0.0, sd) for _ in range(self.dim)] for _ in range(n_items)]
        self.n_items = n_items

    def dot(self, u, i):
        return sum(a * b for a, b in zip(self.p[u], self.q[i]))

    def sample_negative(self, seen):
        j = self.rng.randrange(self.n_items)
        while j in seen:
            j = self.rng.randrange(self.n_items)
        return j

    def step(self, u, pos, neg):
        margin = self.dot(u, pos) - self.dot(u, neg)
        sigmoid = 1.0 / (1.0 + math.exp(margin))
        for d in range(self.dim):
            pu, qp, qn = self.p[u][d], self.q[pos][d], self.q[neg][d]
            self.p[u][d] = pu + self.lr * (sigmoid * (qp - qn) - self.reg * pu)
            self.q[pos][d] = qp + self.lr * (sigmoid * pu - self.reg * qp)
            self.q[neg][d] = qn + self.lr * (-sigmoid * pu - self.reg * qn)

    def train(self, interactions):
        seen = {}
        for user, item, _, _ in interactions:
            seen.setdefault(user, set()).add(item)
        triples = [(u, i) for u, items in seen.items() for i in items]
        for _ in range(self.epochs):
            self.rng.shuffle(triples)
            for u, pos in triples:
                self.step(u, pos, self.sample_negative(seen[u]))

    def recommend(self, user, history, k):
        ranked = []
        for item in range(self.n_items):
            if item not in history:
                ranked.append((-self.dot(user, item), item))
        ranked.sort()
        return [item for _, item in ranked[:k]]
