"""Exhaustive generation of reduced disc diagrams over a presentation.

Diagrams are grown face by face along the boundary (shelling): a new triangle
is glued onto an arc of 1 or 2 consecutive boundary edges, in either
orientation.  Gluing along all 3 would either close a sphere or need a
non-simple boundary, so these two moves reach every disc diagram with simple
boundary, every intermediate stage being one as well.  Non-reduced gluings are
pruned immediately (a subdiagram of a reduced diagram is reduced, so nothing
is lost).

Duplicates are removed by a rooted canonical form: the encoding is minimized
over all boundary basepoints and both directions, which also identifies
mirror images, and faces are numbered boundary-first with ties explored
exhaustively.  Output is deterministic: by face count, then canonical form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .complexes import (
    AbstractLabelledComplex,
    VanKampenDiagram,
    Walk,
    cancel,
    close_walks,
    is_reduced_diagram,
    red,
    side_trace,
)
from .fulfillment import fulfils
from .presentation import TriangularPresentation, sample_presentation
from .seeding import derive_seed

DEFAULT_FACE_CAP = 5

# a search state: (letters per edge, ((walk, label), ...), boundary walk)
_State = tuple[tuple[int, ...], tuple[tuple[Walk, int], ...], Walk]


@dataclass(frozen=True)
class DiagramBudget:
    max_faces: int
    presentation: TriangularPresentation
    epsilon: Fraction = Fraction(1, 100)

    def __post_init__(self) -> None:
        if self.max_faces < 1:
            raise ValueError("max_faces must be at least 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def _ref_letter(ref: int, letters: Sequence[int]) -> int:
    return letters[abs(ref) - 1] if ref > 0 else -letters[abs(ref) - 1]


def _face_side(faces, edge: int):
    """The unique (face word slot) currently holding a boundary edge."""
    for walk, label in faces:
        for t, r in enumerate(walk):
            if abs(r) == edge:
                return label, t, 1 if r > 0 else -1
    raise AssertionError("boundary edge missing from every face")


def _attach(
    state: _State,
    pos: int,
    k: int,
    rel_pos: int,
    start: int,
    mirror: bool,
    relators,
) -> _State | None:
    """Glue a new face spelling relator ``rel_pos`` onto the boundary arc of
    length ``k`` at ``pos``, the glued block occupying word slots
    ``start..start+k-1``; None when letters clash or reducedness fails."""
    letters, faces, boundary = state
    B = len(boundary)
    if k > B:
        return None
    arc = tuple(boundary[(pos + j) % B] for j in range(k))
    word = relators[rel_pos]
    block = arc if mirror else tuple(-r for r in reversed(arc))
    walk = [0, 0, 0]
    for j in range(k):
        slot = (start + j) % 3
        if _ref_letter(block[j], letters) != word[slot]:
            return None
        walk[slot] = block[j]
    new_letters = list(letters)
    fresh: list[int] = []
    for j in range(k, 3):
        slot = (start + j) % 3
        new_letters.append(word[slot])
        ref = len(new_letters)
        walk[slot] = ref
        fresh.append(ref)
    # reducedness across each newly interior edge
    for j in range(k):
        slot = (start + j) % 3
        old_label, t_old, s_old = _face_side(faces, abs(block[j]))
        old_word = relators[old_label - 1]
        s_new = 1 if block[j] > 0 else -1
        if side_trace(old_word, t_old, s_old) == side_trace(word, slot, s_new):
            return None
    path = tuple(fresh) if not mirror else tuple(-r for r in reversed(fresh))
    keep = tuple(boundary[(pos + k + j) % B] for j in range(B - k))
    return (
        tuple(new_letters),
        faces + ((tuple(walk), rel_pos + 1),),
        path + keep,
    )


# ---------------------------------------------------------------------------
# canonical form


def _translate(walk: Walk, rot: int, ids: dict) -> tuple[tuple[int, ...], dict]:
    """Rewrite a face walk in canonical edge ids, minting provisional ids
    (in traversal order, first crossing taken as the forward orientation)."""
    local: dict[int, tuple[int, int]] = {}
    out = []
    nxt = len(ids) + 1
    for j in range(3):
        r = walk[(rot + j) % 3]
        e = abs(r)
        hit = ids.get(e) or local.get(e)
        if hit is None:
            local[e] = (nxt, 1 if r > 0 else -1)
            out.append(nxt)
            nxt += 1
        else:
            nid, sg = hit
            out.append(nid * sg * (1 if r > 0 else -1))
    return tuple(out), local


def _encode_faces(ids: dict, remaining: tuple[int, ...], faces) -> tuple:
    if not remaining:
        return ()
    candidates = []
    for f in remaining:
        walk, label = faces[f]
        for rot in range(3):
            if abs(walk[rot]) not in ids:
                continue
            key, local = _translate(walk, rot, ids)
            candidates.append(((key, label), f, local))
    best_key = min(c[0] for c in candidates)
    best = None
    for ckey, f, local in candidates:
        if ckey != best_key:
            continue
        sub_ids = dict(ids)
        sub_ids.update(local)
        enc = (ckey,) + _encode_faces(
            sub_ids, tuple(g for g in remaining if g != f), faces
        )
        if best is None or enc < best:
            best = enc
    return best


def _canonical(state: _State) -> tuple:
    _, faces, boundary = state
    B = len(boundary)
    best = None
    for direction in (1, -1):
        for root in range(B):
            if direction == 1:
                bwalk = tuple(boundary[(root + j) % B] for j in range(B))
            else:
                bwalk = tuple(-boundary[(root - j) % B] for j in range(B))
            ids: dict[int, tuple[int, int]] = {}
            for ref in bwalk:
                e = abs(ref)
                if e not in ids:
                    ids[e] = (len(ids) + 1, 1 if ref > 0 else -1)
            enc = (B,) + _encode_faces(ids, tuple(range(len(faces))), faces)
            if best is None or enc < best:
                best = enc
    return best


def _to_diagram(state: _State, presentation: TriangularPresentation) -> VanKampenDiagram:
    letters, faces, boundary = state
    walks = tuple(w for w, _ in faces)
    labels = tuple(l for _, l in faces)
    vertex_count, edges = close_walks(len(letters), walks)
    return VanKampenDiagram(
        vertex_count=vertex_count,
        edges=edges,
        faces=walks,
        labels=labels,
        letters=letters,
        presentation=presentation,
        boundary=boundary,
    )


def _slot_index(relators) -> dict[int, list[tuple[int, int]]]:
    """letter -> [(relator position, slot), ...] in deterministic order."""
    index: dict[int, list[tuple[int, int]]] = {}
    for p, word in enumerate(relators):
        for s, c in enumerate(word):
            index.setdefault(c, []).append((p, s))
    return index


def _grow(state: _State, relators, index) -> Iterator[_State]:
    """Every legal single-face extension, in deterministic order.

    Candidate faces are looked up by the letter the glued block must start
    with, so work scales with matches rather than with the relator count."""
    letters, _, boundary = state
    B = len(boundary)
    for pos in range(B):
        first = _ref_letter(boundary[pos], letters)
        for k in (1, 2):
            if k > B:
                continue
            for mirror in (False, True):
                if mirror:
                    # block starts with the arc's first ref as-is
                    want = first
                else:
                    # block is the arc reversed and negated
                    want = -_ref_letter(boundary[(pos + k - 1) % B], letters)
                for rel_pos, start in index.get(want, ()):
                    grown = _attach(state, pos, k, rel_pos, start, mirror, relators)
                    if grown is not None:
                        yield grown


def enumerate_reduced_diagrams(
    budget: DiagramBudget, cap: int = DEFAULT_FACE_CAP
) -> Iterator[VanKampenDiagram]:
    """All reduced disc diagrams with at most ``budget.max_faces`` faces,
    exactly once per labelled combinatorial isomorphism class."""
    if budget.max_faces > cap:
        raise ValueError(
            f"max_faces {budget.max_faces} above the enumeration cap {cap}; "
            "raise cap explicitly to accept the cost"
        )
    presentation = budget.presentation
    relators = presentation.relators
    index = _slot_index(relators)
    level: dict[tuple, _State] = {}
    for p, word in enumerate(relators):
        state: _State = (tuple(word), (((1, 2, 3), p + 1),), (1, 2, 3))
        level.setdefault(_canonical(state), state)
    for canon in sorted(level):
        yield _to_diagram(level[canon], presentation)
    for _ in range(budget.max_faces - 1):
        nxt: dict[tuple, _State] = {}
        for canon in sorted(level):
            for grown in _grow(level[canon], relators, index):
                nxt.setdefault(_canonical(grown), grown)
        level = nxt
        for canon in sorted(level):
            yield _to_diagram(level[canon], presentation)


def euler_check(D: VanKampenDiagram) -> bool:
    """V = 1 + (|D| + |bD|)/2 and E = (3|D| + |bD|)/2 (disc bookkeeping)."""
    if not isinstance(D, VanKampenDiagram):
        raise TypeError("euler_check needs a disc diagram")
    area, rim = D.area, D.boundary_length
    return (
        2 * D.vertex_count == 2 + area + rim
        and 2 * D.edge_count == 3 * area + rim
    )


def isoperimetric_report(budget: DiagramBudget, cap: int = DEFAULT_FACE_CAP) -> dict:
    """Both displayed inequalities and their equivalence on every diagram.

    The area form cancel(D) <= 3(d+eps)|D| and the boundary form
    |bD| >= 3(1-2d-2eps)|D| are computed independently and must agree
    diagram by diagram, via the identity 3|D| = |bD| + 2 cancel(D).
    """
    d = budget.presentation.density
    eps = budget.epsilon
    rows = []
    violations = 0
    identity_ok = True
    equivalence_ok = True
    for D in enumerate_reduced_diagrams(budget, cap):
        c = cancel(D)
        area, rim = D.area, D.boundary_length
        cancel_ok = c <= 3 * (d + eps) * area
        boundary_ok = rim >= 3 * (1 - 2 * d - 2 * eps) * area
        if not cancel_ok:
            violations += 1
        identity_ok = identity_ok and 3 * area == rim + 2 * c
        equivalence_ok = equivalence_ok and cancel_ok == boundary_ok
        rows.append(
            {
                "area": area,
                "boundary_length": rim,
                "cancel": c,
                "cancel_ok": cancel_ok,
                "boundary_ok": boundary_ok,
            }
        )
    return {
        "m": budget.presentation.m,
        "density": str(d),
        "epsilon": str(eps),
        "max_faces": budget.max_faces,
        "diagrams": rows,
        "total": len(rows),
        "violations": violations,
        "identity_holds": identity_ok,
        "equivalence_holds": equivalence_ok,
        "violation_frequency": str(Fraction(violations, len(rows))) if rows else "0",
    }


def labelled_complex_report(
    presentation: TriangularPresentation,
    bindings: Sequence[tuple[AbstractLabelledComplex, Sequence[int]]],
    epsilon: Fraction = Fraction(1, 100),
) -> dict:
    """cancel(Y) - red(Y) against 3(d+eps)|Y| for fulfilled complexes.

    Each binding is (Y, relator positions); a binding whose words do not
    consistently label Y is rejected.
    """
    d = presentation.density
    rows = []
    holds_all = True
    for Y, positions in bindings:
        if not fulfils(Y, positions, presentation):
            raise ValueError("complex is not fulfilled by the given relator positions")
        lhs = cancel(Y) - red(Y)
        rhs = 3 * (d + epsilon) * Y.face_count
        ok = lhs <= rhs
        holds_all = holds_all and ok
        rows.append(
            {
                "faces": Y.face_count,
                "cancel_minus_red": lhs,
                "bound": str(rhs),
                "holds": ok,
            }
        )
    return {"complexes": rows, "all_hold": holds_all}


def sampled_violation_trend(
    m_values: Sequence[int],
    d: Fraction,
    epsilon: Fraction,
    max_faces: int,
    presentations: int,
    seed: int,
) -> dict:
    """Violation counts of the area-form inequality across sampled
    presentations, per m; the desk-scale shadow of the asymptotic claim."""
    per_m = []
    for m in m_values:
        diagrams = 0
        bad_diagrams = 0
        bad_presentations = 0
        for i in range(presentations):
            pres = sample_presentation(m, d, derive_seed(seed, "isop", m, i))
            rep = isoperimetric_report(DiagramBudget(max_faces, pres, epsilon))
            diagrams += rep["total"]
            bad_diagrams += rep["violations"]
            if rep["violations"]:
                bad_presentations += 1
        per_m.append(
            {
                "m": m,
                "presentations": presentations,
                "diagrams": diagrams,
                "violating_diagrams": bad_diagrams,
                "violating_presentations": bad_presentations,
                "frequency": str(Fraction(bad_diagrams, diagrams)) if diagrams else "0",
            }
        )
    return {
        "density": str(d),
        "epsilon": str(epsilon),
        "max_faces": max_faces,
        "per_m": per_m,
    }
