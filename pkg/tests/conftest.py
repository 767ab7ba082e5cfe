import numpy as np

from replicability.data import HypothesisRecord, StudyPairData


def make_data(p1, p2=None, ids=None, **kw) -> StudyPairData:
    rows = []
    for i, p in enumerate(p1):
        rid = ids[i] if ids is not None else f"h{i}"
        follow = None if p2 is None or p2[i] is None else float(p2[i])
        rows.append(HypothesisRecord(rid, float(p), follow))
    return StudyPairData(rows, **kw)


def random_instance(rng: np.random.Generator, max_m: int = 200, max_r1: int = 50):
    """A random two-study dataset plus levels, with enough small p-values
    to make rejections common."""
    m = int(rng.integers(4, max_m + 1))
    n_small = int(rng.integers(1, max(2, m // 3)))
    p1 = rng.random(m)
    p2 = rng.random(m)
    small = rng.choice(m, size=n_small, replace=False)
    p1[small] = rng.random(n_small) * 5.0 / m
    p2[small] = np.where(
        rng.random(n_small) < 0.7, rng.random(n_small) * 0.02, p2[small]
    )
    q = float(rng.uniform(0.03, 0.25))
    c = float(rng.uniform(0.1, 0.9))
    q1 = c * q
    k = int(rng.integers(1, min(max_r1, m) + 1))
    return make_data(p1, p2), q1, q, k
