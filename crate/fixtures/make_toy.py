"""Regenerates toy_interactions.csv. The output is committed; rerunning
this script must reproduce it byte for byte (python3 fixtures/make_toy.py).
"""
import csv
import random

N_USERS = 50
N_ITEMS = 40
BASE_T = 1_600_000_000


def main():
    rng = random.Random(7)
    rows = []
    for u in range(1, N_USERS + 1):
        cluster = u % 4
        n = 12 + (u * 7) % 11
        step = 1 + u % 3
        seen = set()
        t = BASE_T + u * 1000
        for j in range(n):
            roll = rng.random()
            if roll < 0.6:
                item = 10 * cluster + (j * step) % 10
            elif roll < 0.85:
                item = rng.randrange(5)
            else:
                item = rng.randrange(N_ITEMS)
            # Prefer unseen items so held-out items stay recommendable.
            tries = 0
            while item in seen and tries < N_ITEMS:
                item = (item + 1) % N_ITEMS
                tries += 1
            seen.add(item)
            own = 10 * cluster <= item < 10 * (cluster + 1)
            if own:
                rating = 4 + (1 if rng.random() < 0.5 else 0)
            else:
                rating = 1 + rng.randrange(3)
            rows.append((f"u{u:02d}", f"i{item:02d}", t, rating))
            t += 3600 * (1 + (u + j) % 5)
    with open("fixtures/toy_interactions.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["user_id", "item_id", "timestamp", "rating"])
        w.writerows(rows)
    print(f"{len(rows)} interactions for {N_USERS} users over {N_ITEMS} items")


if __name__ == "__main__":
    main()
