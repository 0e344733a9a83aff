"""Independent reference implementations used as test oracles.

These deliberately re-derive results from first principles (plain loops,
exhaustive enumeration, brute force) and never share code with the package
paths they check.
"""

from __future__ import annotations

from itertools import combinations


# ---------------------------------------------------------------------------
# Selection: naive per-step-renormalizing greedy, O(n^2) and transparent.

def naive_greedy(items, weights, budget_kind, budget_limit):
    """items: list of (sentence_id, tokens tuple, perplexity, term_density,
    duration_s). Returns the selected id sequence."""
    alpha, beta, gamma = weights
    remaining = {sid: (tuple(toks), ppl, td, dur) for sid, toks, ppl, td, dur in items}
    vocabulary: set[str] = set()
    selected: list[str] = []
    budget = float(budget_limit)
    while remaining and budget > 0:
        raws = {}
        for sid, (toks, ppl, td, _dur) in remaining.items():
            nvg = len(set(toks) - vocabulary) / len(toks)
            raws[sid] = (nvg, ppl, td)
        columns = list(zip(*raws.values()))
        bounds = [(min(col), max(col)) for col in columns]

        def norm(x, lo, hi):
            if hi == lo:
                return 0.0
            return (x - lo) / (hi - lo)

        best_id = None
        best_score = None
        for sid, (nvg, ppl, td) in raws.items():
            score = (
                alpha * norm(nvg, *bounds[0])
                + beta * norm(ppl, *bounds[1])
                + gamma * norm(td, *bounds[2])
            )
            if best_id is None or score > best_score or (score == best_score and sid < best_id):
                best_id = sid
                best_score = score
        cost = 1.0 if budget_kind == "count" else remaining[best_id][3]
        if cost > budget:
            del remaining[best_id]
            continue
        vocabulary |= set(remaining[best_id][0])
        del remaining[best_id]
        selected.append(best_id)
        budget -= cost
    return selected


def naive_vcm(items):
    """Greedy vocabulary-coverage reference: maximize unseen-words-per-word
    each step, ties to the lowest id; selects the whole pool."""
    remaining = {sid: tuple(toks) for sid, toks, *_ in items}
    vocabulary: set[str] = set()
    order: list[str] = []
    while remaining:
        best_id = None
        best_gain = None
        for sid, toks in remaining.items():
            gain = len(set(toks) - vocabulary) / len(toks)
            if best_id is None or gain > best_gain or (gain == best_gain and sid < best_id):
                best_id, best_gain = sid, gain
        vocabulary |= set(remaining.pop(best_id))
        order.append(best_id)
    return order


# ---------------------------------------------------------------------------
# Text metrics.

def naive_mattr(tokens, window):
    tokens = list(tokens)
    if len(tokens) < window:
        return len(set(tokens)) / len(tokens)
    ratios = []
    for start in range(len(tokens) - window + 1):
        chunk = tokens[start:start + window]
        ratios.append(len(set(chunk)) / window)
    return sum(ratios) / len(ratios)


def naive_distinct_n(sentences_tokens, n):
    grams = set()
    total = 0
    for tokens in sentences_tokens:
        for i in range(len(tokens) - n + 1):
            grams.add(tuple(tokens[i:i + n]))
            total += 1
    return len(grams) / total


def naive_term_count(sentences_tokens, terms):
    total = 0
    for tokens in sentences_tokens:
        for token in tokens:
            if token in terms:
                total += 1
    return total


def naive_extract_terms(sentences_tokens, reference_vocab, min_frequency):
    counts: dict[str, int] = {}
    for tokens in sentences_tokens:
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
    return {
        t: c for t, c in counts.items()
        if c >= min_frequency and t not in reference_vocab
    }


def naive_addk_perplexity(train_token_lists, score_tokens, order, k):
    """Independent add-k n-gram sentence perplexity with BOS padding and UNK
    mapping, written as plain dict arithmetic."""
    import math

    bos, unk = "<s>", "<unk>"
    vocab = {unk}
    counts: dict[tuple, dict[str, int]] = {}
    for tokens in train_token_lists:
        vocab.update(tokens)
        padded = [bos] * (order - 1) + list(tokens)
        for i, token in enumerate(tokens):
            context = tuple(padded[i:i + order - 1])
            slot = counts.setdefault(context, {})
            slot[token] = slot.get(token, 0) + 1
    log_sum = 0.0
    padded = [bos] * (order - 1) + [t if t in vocab else unk for t in score_tokens]
    for i in range(len(score_tokens)):
        context = tuple(padded[i:i + order - 1])
        token = padded[i + order - 1]
        slot = counts.get(context, {})
        total = sum(slot.values())
        prob = (slot.get(token, 0) + k) / (total + k * len(vocab))
        log_sum += math.log(prob)
    return math.exp(-log_sum / len(score_tokens))


# ---------------------------------------------------------------------------
# Alignment.

def wf_edit_distance(a, b):
    """Classic Wagner-Fischer distance with a rolling row; independent of
    the package's alignment DP."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        current = [i]
        for j, y in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (0 if x == y else 1),
            ))
        previous = current
    return previous[-1]


def enum_edit_distance(a, b):
    """True exhaustive enumeration over all alignments (exponential; tiny
    inputs only)."""
    best = [len(a) + len(b)]

    def walk(i, j, cost):
        if cost >= best[0]:
            return
        if i == len(a) and j == len(b):
            best[0] = min(best[0], cost)
            return
        if i < len(a) and j < len(b):
            walk(i + 1, j + 1, cost + (0 if a[i] == b[j] else 1))
        if i < len(a):
            walk(i + 1, j, cost + 1)
        if j < len(b):
            walk(i, j + 1, cost + 1)

    walk(0, 0, 0)
    return best[0]


_OP_RANK = {"match": 0, "sub": 1, "del": 2, "ins": 3}


def enumerate_best_alignment(ref, hyp):
    """All alignments, ranked by (cost, -matches, op-rank sequence); returns
    the op-kind sequence of the winner. Exponential; tiny inputs only."""
    results = []

    def walk(i, j, ops):
        if i == len(ref) and j == len(hyp):
            cost = sum(1 for op in ops if op != "match")
            matches = sum(1 for op in ops if op == "match")
            results.append((cost, -matches, [_OP_RANK[op] for op in ops], list(ops)))
            return
        if i < len(ref) and j < len(hyp):
            walk(i + 1, j + 1, ops + ["match" if ref[i] == hyp[j] else "sub"])
        if i < len(ref):
            walk(i + 1, j, ops + ["del"])
        if j < len(hyp):
            walk(i, j + 1, ops + ["ins"])

    walk(0, 0, [])
    return min(results)[3]


# ---------------------------------------------------------------------------
# Clustering.

def brute_force_best_2partition(points):
    """Optimal 2-partition by inertia (centroid = mean); points as tuples.
    Returns a frozenset of two frozensets of indices."""
    n = len(points)
    dim = len(points[0])

    def inertia(indices):
        if not indices:
            return 0.0
        center = [sum(points[i][d] for i in indices) / len(indices) for d in range(dim)]
        return sum(
            sum((points[i][d] - center[d]) ** 2 for d in range(dim)) for i in indices
        )

    best = None
    best_parts = None
    all_indices = set(range(n))
    for size in range(1, n // 2 + 1):
        for part in combinations(range(n), size):
            part_a = set(part)
            part_b = all_indices - part_a
            value = inertia(part_a) + inertia(part_b)
            if best is None or value < best:
                best = value
                best_parts = frozenset({frozenset(part_a), frozenset(part_b)})
    return best_parts, best
