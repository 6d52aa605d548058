"""Word assignments on labelled complexes and their probabilities.

A tuple of length-3 words *fulfils* an abstract labelled complex when writing
word ``i`` along every face of label ``i`` pins down at most one letter per
oriented edge (opposite orientations carrying mutually inverse letters).  For
words drawn i.i.d. uniformly from the cyclically reduced support this module
computes the per-level probabilities

* exhaustively (``exact_probabilities``, feasible for m <= 3 and <= 3 labels),
* in closed form by inclusion-exclusion over the cyclic-reduction constraints
  (``structure_counts``), which scales to a sweep over *all* incidence
  structures with a bounded number of faces,

and checks the per-level inequality p_i / p_{i-1} <= (2m-1)^(-delta_i), where
delta_i is the forced-letter level from :func:`trigroup.complexes.label_forcing_levels`.

Probabilities are exact rationals throughout; the only floats appear in the
final exponential bound and the Monte Carlo confidence interval.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import exp, log
from typing import Iterator, Mapping, Sequence

from .complexes import (
    AbstractLabelledComplex,
    SignedUnionFind,
    abstract_from_walks,
    all_edges_in_faces,
    cancel,
    label_forcing_levels,
    red,
    ref_edge,
)
from .seeding import make_rng
from .words import (
    Word,
    enumerate_triangle_words,
    sample_triangle_word,
    triangle_word_count,
)

#: 99% two-sided normal quantile for the Wilson interval.
_WILSON_Z = 2.5758293035489004

EXACT_M_CAP = 3
EXACT_LEVEL_CAP = 3


def _label_levels(Y: AbstractLabelledComplex) -> int:
    n = max(Y.labels)
    if set(Y.labels) != set(range(1, n + 1)):
        raise ValueError("face labels must cover 1..n")
    return n


# ---------------------------------------------------------------------------
# partial labellings


@dataclass(frozen=True)
class PartialLabelling:
    """Letter sets induced on oriented edges by words for labels 1..k.

    ``assigned`` maps ``(edge, direction)`` to the set of letters forced on
    that orientation; consistency means every set is a singleton and the two
    orientations of an edge carry mutually inverse letters.
    """

    complex: AbstractLabelledComplex
    words: tuple[Word, ...]
    assigned: Mapping[tuple[int, int], frozenset[int]]

    def is_consistent(self) -> bool:
        for (e, direction), letters in self.assigned.items():
            if len(letters) > 1:
                return False
            opposite = self.assigned.get((e, -direction))
            if opposite and len(opposite) == 1:
                if next(iter(letters)) != -next(iter(opposite)):
                    return False
        return True


def partial_label(Y: AbstractLabelledComplex, words: Sequence[Word]) -> PartialLabelling:
    """Write ``words[j-1]`` along every face of label ``j``, j <= len(words)."""
    _label_levels(Y)
    sets: dict[tuple[int, int], set[int]] = {}
    for f, walk in enumerate(Y.faces):
        j = Y.labels[f]
        if j > len(words):
            continue
        w = words[j - 1]
        if len(w) != len(walk):
            raise ValueError(
                f"word of length {len(w)} against a face of length {len(walk)}"
            )
        for t, ref in enumerate(walk):
            key = (ref_edge(ref), 1 if ref > 0 else -1)
            sets.setdefault(key, set()).add(w[t])
    return PartialLabelling(
        complex=Y,
        words=tuple(tuple(w) for w in words),
        assigned={k: frozenset(v) for k, v in sets.items()},
    )


def is_consistent(pl: PartialLabelling) -> bool:
    return pl.is_consistent()


def fulfils(
    Y: AbstractLabelledComplex,
    positions: Sequence[int],
    presentation,
) -> bool:
    """Do the relators at the given positions (one per label, injective) fulfil Y?"""
    n = _label_levels(Y)
    if len(positions) != n:
        raise ValueError(f"expected {n} relator positions")
    if len(set(positions)) != len(positions):
        raise ValueError("relator positions must be injective")
    words = tuple(presentation.relators[p] for p in positions)
    return partial_label(Y, words).is_consistent()


# ---------------------------------------------------------------------------
# exhaustive probabilities


@dataclass(frozen=True)
class FulfillmentProbe:
    """Exact per-level fulfillment counts for i.i.d. uniform support words."""

    complex: AbstractLabelledComplex
    m: int
    counts: tuple[int, ...]  # counts[i] = consistent i-tuples, counts[0] = 1

    @property
    def probabilities(self) -> tuple[Fraction, ...]:
        base = triangle_word_count(self.m)
        return tuple(
            Fraction(c, base**i) for i, c in enumerate(self.counts)
        )


def exact_probabilities(
    Y: AbstractLabelledComplex, m: int, allow_large: bool = False
) -> FulfillmentProbe:
    """Count consistent word tuples level by level over the full support.

    Cost grows as ((2m-1)^3+1)^n; refused above m=3 / n=3 unless
    ``allow_large`` acknowledges it.
    """
    n = _label_levels(Y)
    if not allow_large and (m > EXACT_M_CAP or n > EXACT_LEVEL_CAP):
        raise ValueError(
            f"exhaustive enumeration needs m <= {EXACT_M_CAP} and <= "
            f"{EXACT_LEVEL_CAP} labels (got m={m}, n={n}); pass allow_large to override"
        )
    support = enumerate_triangle_words(m, rank_cap=max(m, 6))
    faces_by_label = [
        [(Y.faces[f]) for f in range(Y.face_count) if Y.labels[f] == j]
        for j in range(1, n + 1)
    ]
    counts = [0] * (n + 1)
    counts[0] = 1
    letters: dict[int, int] = {}

    def place(walks, word) -> list[int] | None:
        added: list[int] = []
        for walk in walks:
            for t, ref in enumerate(walk):
                e = ref_edge(ref)
                code = word[t] if ref > 0 else -word[t]
                known = letters.get(e)
                if known is None:
                    letters[e] = code
                    added.append(e)
                elif known != code:
                    for x in added:
                        del letters[x]
                    return None
        return added

    def descend(level: int) -> None:
        for w in support:
            added = place(faces_by_label[level - 1], w)
            if added is None:
                continue
            counts[level] += 1
            if level < n:
                descend(level + 1)
            for e in added:
                del letters[e]

    descend(1)
    return FulfillmentProbe(complex=Y, m=m, counts=tuple(counts))


def forcing_bounds(Y: AbstractLabelledComplex) -> list[tuple[int, int]]:
    """Per-level maximal forced-letter counts (i, delta_i)."""
    if not all_edges_in_faces(Y):
        raise ValueError("forced-letter levels need every edge inside a face")
    _label_levels(Y)
    return label_forcing_levels(Y)


def ratio_checks(probe: FulfillmentProbe) -> list[dict]:
    """Per-level ratio inequalities, as exact integer comparisons.

    ``holds``: the nominal bound p_i/p_{i-1} <= (2m-1)^(-delta_i), i.e.
    counts[i] * (2m-1)^delta_i <= counts[i-1] * ((2m-1)^3+1).  This is the
    bound the chain argument aims for, but it genuinely fails on complexes
    whose level-i faces force w_i to repeat (or invert) one of its own
    letters: the count of words with a repeated symbol is 2m(2m-1), slightly
    more than (2m-1)^2.  Minimal case: one face with boundary (e, e, f).

    ``holds_guaranteed``: the always-valid form
    counts[i] * (2m-1)^delta_i <= counts[i-1] * 2m(2m-1)^2, obtained by
    counting letter choices class by class (the first free letter class has
    up to 2m values, every later one at most 2m-1, and delta_i is at most
    3 minus the number of free classes).  Tight on the repeated-letter
    complexes above.
    """
    deltas = dict(forcing_bounds(probe.complex))
    base = triangle_word_count(probe.m)
    q = 2 * probe.m - 1
    out = []
    for i in range(1, len(probe.counts)):
        lhs = probe.counts[i] * q ** deltas[i]
        out.append(
            {
                "level": i,
                "delta": deltas[i],
                "count": probe.counts[i],
                "bound": Fraction(1, q ** deltas[i]),
                "holds": lhs <= probe.counts[i - 1] * base,
                "holds_guaranteed": lhs <= probe.counts[i - 1] * 2 * probe.m * q**2,
            }
        )
    return out


def final_probability_bound(Y: AbstractLabelledComplex, m: int, d: Fraction) -> float:
    """The closed-form exponential upper bound on the fulfillment probability."""
    size = Y.face_count
    if size < 1:
        raise ValueError("need at least one face")
    excess = Fraction(3 * size + 2 * (red(Y) - cancel(Y)), size) - 3 * (1 - 2 * Fraction(d))
    return exp(log(2 * m - 1) * float(excess) / 2)


def montecarlo_fulfillment(
    Y: AbstractLabelledComplex, m: int, trials: int, seed: int
) -> dict:
    """Frequency of fulfillment by i.i.d. uniform tuples, with 99% Wilson CI."""
    if trials < 1:
        raise ValueError("trials must be positive")
    n = _label_levels(Y)
    rng = make_rng(seed, "montecarlo", m, n)
    hits = 0
    for _ in range(trials):
        words = tuple(sample_triangle_word(m, rng) for _ in range(n))
        if partial_label(Y, words).is_consistent():
            hits += 1
    phat = hits / trials
    z2 = _WILSON_Z**2
    denom = 1 + z2 / trials
    centre = (phat + z2 / (2 * trials)) / denom
    half = (
        _WILSON_Z
        * ((phat * (1 - phat) / trials + z2 / (4 * trials**2)) ** 0.5)
        / denom
    )
    return {
        "m": m,
        "trials": trials,
        "hits": hits,
        "estimate": phat,
        "wilson_low": max(0.0, centre - half),
        "wilson_high": min(1.0, centre + half),
    }


# ---------------------------------------------------------------------------
# incidence structures and the closed-form counter
#
# For probability purposes only the face/edge incidence matters, never the
# vertices: a structure is a partition of the 3k walk slots into edge classes
# with traversal signs, plus a label per face.


@dataclass(frozen=True)
class FaceStructure:
    classes: tuple[int, ...]  # per slot, ids 0.. in first-appearance order
    signs: tuple[int, ...]  # per slot; first occurrence of a class is +1
    labels: tuple[int, ...]  # per face, surjective onto 1..n

    @property
    def face_count(self) -> int:
        return len(self.labels)

    def __post_init__(self) -> None:
        if len(self.classes) != 3 * len(self.labels) or len(self.signs) != len(self.classes):
            raise ValueError("slot count must be 3 per face")
        seen: set[int] = set()
        for s, c in enumerate(self.classes):
            if c not in seen:
                seen.add(c)
                if c != len(seen) - 1 or self.signs[s] != 1:
                    raise ValueError("classes must appear in order, first sign +1")


def structure_to_complex(fs: FaceStructure) -> AbstractLabelledComplex:
    walks = [
        tuple(
            fs.signs[3 * f + t] * (fs.classes[3 * f + t] + 1)
            for t in range(3)
        )
        for f in range(fs.face_count)
    ]
    return abstract_from_walks(walks, fs.labels)


def random_structure(rng: random.Random, faces: int) -> FaceStructure:
    slots = 3 * faces
    k = rng.randint(1, slots)
    raw = [rng.randrange(k) for _ in range(slots)]
    rename: dict[int, int] = {}
    classes, signs = [], []
    for c in raw:
        if c not in rename:
            rename[c] = len(rename)
            signs.append(1)
        else:
            signs.append(rng.choice((1, -1)))
        classes.append(rename[c])
    n = rng.randint(1, faces)
    labels = list(range(1, n + 1)) + [rng.randint(1, n) for _ in range(faces - n)]
    rng.shuffle(labels)
    return FaceStructure(tuple(classes), tuple(signs), tuple(labels))


def count_letter_assignments(
    n_classes: int,
    constraints: Sequence[tuple[int, int, int]],
    sizes: Sequence[int],
) -> tuple[int, ...]:
    """Assignments of alphabet letters to classes avoiding forbidden relations.

    Each constraint ``(a, b, t)`` forbids ``L[a] = t * L[b]``; the alphabet is
    closed under negation and has ``x`` letters (x even, no fixed point of
    negation).  Returns the count for each x in ``sizes``, by
    inclusion-exclusion over constraint subsets with parity tracking.
    """
    pows = [[x**c for c in range(n_classes + 1)] for x in sizes]
    totals = [0] * len(sizes)
    parent = list(range(n_classes))
    sgn = [1] * n_classes

    def find(x: int) -> tuple[int, int]:
        s = 1
        while parent[x] != x:
            s *= sgn[x]
            x = parent[x]
        return x, s

    def rec(i: int, parity: int, comp: int) -> None:
        if i == len(constraints):
            for j in range(len(sizes)):
                totals[j] += parity * pows[j][comp]
            return
        a, b, t = constraints[i]
        ra, sa = find(a)
        rb, sb = find(b)
        if ra == rb:
            if sa * sb == t:
                return  # implied: including or excluding cancels pairwise
            rec(i + 1, parity, comp)  # contradictory: include branch is empty
            return
        rec(i + 1, parity, comp)
        parent[rb] = ra
        sgn[rb] = sa * t * sb
        rec(i + 1, -parity, comp - 1)
        parent[rb] = rb
        sgn[rb] = 1

    rec(0, 1, n_classes)
    return tuple(totals)


def _merged_key(
    classes: Sequence[int],
    signs: Sequence[int],
    groups: Sequence[Sequence[int]],
):
    """Reduce faces sharing a word, then normalize to a memoizable key.

    Returns ``(class_count, constraints)`` or None when no word tuple can be
    consistent (a letter forced equal to its own inverse, or a word position
    forced equal to the inverse of its cyclic predecessor).
    """
    present = sorted({f for g in groups for f in g})
    ids = sorted({classes[3 * f + t] for f in present for t in range(3)})
    local = {c: i for i, c in enumerate(ids)}
    uf = SignedUnionFind(len(ids))
    for group in groups:
        rep = group[0]
        for f in group[1:]:
            for t in range(3):
                a = local[classes[3 * rep + t]]
                b = local[classes[3 * f + t]]
                rel = signs[3 * rep + t] * signs[3 * f + t]
                if not uf.union(a, b, rel):
                    return None
    raw: set[tuple[int, int, int]] = set()
    for group in groups:
        rep = group[0]
        slots = [
            uf.find(local[classes[3 * rep + t]]) for t in range(3)
        ]
        for t in range(3):
            (ra, sa) = slots[t]
            (rb, sb) = slots[(t + 1) % 3]
            twist = -(signs[3 * rep + t] * sa) * (signs[3 * rep + (t + 1) % 3] * sb)
            if ra == rb:
                if twist == 1:
                    return None  # the word could never be cyclically reduced
                continue  # x != x^-1 holds for free
            raw.add((min(ra, rb), max(ra, rb), twist))
    roots = sorted({uf.find(local[c])[0] for c in ids})
    rename = {r: i for i, r in enumerate(roots)}
    constraints = tuple(sorted((rename[a], rename[b], t) for a, b, t in raw))
    return len(roots), constraints


def structure_counts(
    fs: FaceStructure,
    ms: Sequence[int],
    memo: dict | None = None,
) -> list[tuple[int, ...]]:
    """counts[i][j] = consistent i-tuples of words at m = ms[j], i = 0..n.

    Closed form: whatever the vertex structure, a consistent tuple is exactly
    a letter assignment to the merged edge classes avoiding the
    cyclic-reduction relations, counted by inclusion-exclusion.
    """
    if memo is None:
        memo = {}
    n = max(fs.labels)
    if set(fs.labels) != set(range(1, n + 1)):
        raise ValueError("labels must cover 1..n")
    sizes = [2 * m for m in ms]
    out: list[tuple[int, ...]] = [tuple(1 for _ in ms)]
    for level in range(1, n + 1):
        groups = [
            [f for f in range(fs.face_count) if fs.labels[f] == j]
            for j in range(1, level + 1)
        ]
        key = _merged_key(fs.classes, fs.signs, groups)
        if key is None:
            out.append(tuple(0 for _ in ms))
            continue
        cached = memo.get(key)
        if cached is None:
            cached = count_letter_assignments(key[0], key[1], sizes)
            memo[key] = cached
        out.append(cached)
    return out


# ---------------------------------------------------------------------------
# the sweep over every structure with at most `max_faces` faces


def _iter_signed_partitions(slots: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All partitions of slot positions into classes, with traversal signs.

    Classes appear in first-use order; the first slot of each class is +1,
    later slots carry either sign.  (Restricted-growth strings with signs.)
    """
    classes = [0] * slots
    signs = [1] * slots

    def rec(i: int, used: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        if i == slots:
            yield tuple(classes), tuple(signs)
            return
        for c in range(used):
            classes[i] = c
            for s in (1, -1):
                signs[i] = s
                yield from rec(i + 1, used)
            signs[i] = 1
        classes[i] = used
        yield from rec(i + 1, used + 1)

    yield from rec(0, 0)


_FACE_PERMS = {
    1: [(0,)],
    2: [(0, 1), (1, 0)],
    3: [
        (0, 1, 2),
        (0, 2, 1),
        (1, 0, 2),
        (1, 2, 0),
        (2, 0, 1),
        (2, 1, 0),
    ],
}


def _permuted_encoding(
    classes: Sequence[int], signs: Sequence[int], perm: Sequence[int]
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    rename: dict[int, int] = {}
    flip: dict[int, int] = {}
    out_c: list[int] = []
    out_s: list[int] = []
    for f in perm:
        for t in range(3):
            slot = 3 * f + t
            c = classes[slot]
            if c not in rename:
                rename[c] = len(rename)
                flip[c] = signs[slot]
            out_c.append(rename[c])
            out_s.append(signs[slot] * flip[c])
    return tuple(out_c), tuple(out_s)


def _delta_top(
    classes: Sequence[int],
    top_faces: Sequence[int],
    lower_faces: Sequence[int],
) -> int:
    """Max forced-letter count over the top-level faces.

    A slot class is free for face f exactly when no lower face contains it
    and f is among the earliest top faces to reach it.
    """
    lower = {classes[3 * f + t] for f in lower_faces for t in range(3)}
    least: dict[int, dict[int, int]] = {}
    for f in top_faces:
        for t in range(3):
            least.setdefault(classes[3 * f + t], {}).setdefault(f, t)
    worst = 0
    for f in top_faces:
        free = 0
        for c in {classes[3 * f + t] for t in range(3)}:
            if c in lower:
                continue
            mine = least[c][f]
            if all(mine <= pos for pos in least[c].values()):
                free += 1
        worst = max(worst, 3 - free)
    return worst


def _top_level_check(
    classes, signs, top: list[int], lower_groups: list[list[int]],
    ms, bases, powers, memo,
) -> tuple[list[int], list[int]]:
    """Check the nominal and guaranteed top-level ratio bounds at every m.

    Returns (ms violating the nominal bound, ms violating the guaranteed
    one); see :func:`ratio_checks` for the two inequalities.
    """
    key_full = _merged_key(classes, signs, lower_groups + [top])
    if key_full is None:
        return [], []  # zero consistent tuples at the top level
    full = memo.get(key_full)
    if full is None:
        full = count_letter_assignments(key_full[0], key_full[1], [2 * m for m in ms])
        memo[key_full] = full
    if lower_groups:
        key_low = _merged_key(classes, signs, lower_groups)
        if key_low is None:
            lowc = tuple(0 for _ in ms)
        else:
            lowc = memo.get(key_low)
            if lowc is None:
                lowc = count_letter_assignments(
                    key_low[0], key_low[1], [2 * m for m in ms]
                )
                memo[key_low] = lowc
    else:
        lowc = tuple(1 for _ in ms)
    delta = _delta_top(classes, top, [f for g in lower_groups for f in g])
    nominal: list[int] = []
    guaranteed: list[int] = []
    for j, m in enumerate(ms):
        lhs = full[j] * powers[j][delta]
        if lhs > lowc[j] * bases[j]:
            nominal.append(m)
            if lhs > lowc[j] * 2 * m * (2 * m - 1) ** 2:
                guaranteed.append(m)
    return nominal, guaranteed


def _structure_configs(k: int, stabilizer: list) -> list[tuple[list[int], list[list[int]]]]:
    """All (top group, lower grouping) shapes on k faces, up to the stabilizer.

    Only the top level of each structure needs checking: the lower levels are
    top levels of smaller structures enumerated separately.  The order of
    lower labels never changes the count, so lower faces only need grouping.
    """
    if k == 1:
        return [([0], [])]
    configs: list[tuple[list[int], list[list[int]]]] = []
    seen: set[tuple] = set()

    def canon(top: list[int], lowers: list[list[int]]) -> tuple:
        best = None
        for perm in stabilizer:
            t = tuple(sorted(perm[f] for f in top))
            ls = tuple(sorted(tuple(sorted(perm[f] for f in g)) for g in lowers))
            cand = (t, ls)
            if best is None or cand < best:
                best = cand
        return best

    def add(top: list[int], lowers: list[list[int]]) -> None:
        c = canon(top, lowers)
        if c not in seen:
            seen.add(c)
            configs.append((top, lowers))

    faces = list(range(k))
    if k == 2:
        add(faces, [])  # one label
        for c in faces:
            add([c], [[1 - c]])
    else:
        add(faces, [])  # n = 1
        for c in faces:
            rest = [f for f in faces if f != c]
            add([c], [rest])  # n = 2, singleton on top
            add(rest, [[c]])  # n = 2, pair on top
            add([c], [[rest[0]], [rest[1]]])  # n = 3 (lower order irrelevant)
    return configs


def ratio_sweep(max_faces: int = 3, ms: Sequence[int] = (1, 2, 3)) -> dict:
    """Check the per-level ratio inequalities over *every* incidence structure
    with at most ``max_faces`` faces, at every m in ``ms``.

    Structures are deduplicated under face permutations (orientation flips of
    an edge class are part of the enumeration itself); for each structure only
    the top label level is checked, lower levels being top levels of smaller
    structures.  ``violations`` lists structures beating the nominal
    (2m-1)^(-delta) bound — these exist, precisely the within-word forcing
    family described in :func:`ratio_checks` — while ``guaranteed_violations``
    collects failures of the provable 2m(2m-1)^(2-delta) form and stays empty.
    """
    if max_faces > 3:
        raise ValueError("sweep supports at most 3 faces")
    bases = [triangle_word_count(m) for m in ms]
    powers = [[(2 * m - 1) ** d for d in range(4)] for m in ms]
    memo: dict = {}
    report = {
        "ms": list(ms),
        "structures": 0,
        "checks": 0,
        "violations": [],
        "guaranteed_violations": [],
        "per_face_count": {},
    }
    for k in range(1, max_faces + 1):
        perms = _FACE_PERMS[k]
        n_structures = 0
        for classes, signs in _iter_signed_partitions(3 * k):
            encodings = [_permuted_encoding(classes, signs, p) for p in perms]
            me = (classes, signs)
            if min(encodings) != me:
                continue
            stabilizer = [p for p, enc in zip(perms, encodings) if enc == me]
            for top, lowers in _structure_configs(k, stabilizer):
                n_structures += 1
                report["checks"] += len(ms)
                nominal, guaranteed = _top_level_check(
                    classes, signs, top, lowers, ms, bases, powers, memo
                )
                if nominal:
                    record = {
                        "classes": list(classes),
                        "signs": list(signs),
                        "top": top,
                        "lower_groups": lowers,
                        "ms": nominal,
                    }
                    report["violations"].append(record)
                    if guaranteed:
                        report["guaranteed_violations"].append(
                            dict(record, ms=guaranteed)
                        )
        report["per_face_count"][k] = n_structures
        report["structures"] += n_structures
    return report
