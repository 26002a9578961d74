"""Independent reference for the local hash embedder and the nearest-centroid
classifier. Used to freeze expected values for the C++ test suites; it shares
no code with the library."""

import math
import re

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK64
    return h


def tokens(text: str):
    lowered = text.encode("utf-8").lower()
    return [t for t in re.split(rb"[^a-z0-9]+", lowered) if t]


def accumulate(text: str, dim: int):
    acc = [0.0] * dim
    for tok in tokens(text):
        acc[fnv1a64(tok) % dim] += 1.0
        for i in range(len(tok) - 2):
            acc[fnv1a64(tok[i:i + 3]) % dim] += 0.5
    return acc


def normalize(v):
    n = math.sqrt(sum(x * x for x in v))
    if n == 0.0:
        raise ValueError("zero vector")
    return [x / n for x in v]


def embed(text: str, dim: int = 256):
    return normalize(accumulate(text, dim))


def cosine(a, b):
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    return max(-1.0, min(1.0, dot / (na * nb)))


def centroids(labelled):
    sums = {}
    for label, vec in labelled:
        acc = sums.setdefault(label, [0.0] * len(vec))
        for i, x in enumerate(vec):
            acc[i] += x
    return {label: normalize(acc) for label, acc in sums.items()}


def classify(cents, query):
    scores = {label: cosine(query, c) for label, c in cents.items()}
    best = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    return best, scores
