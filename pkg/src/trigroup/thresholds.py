"""Critical density, derived constants, and the closing inequality chain.

Everything here is arithmetic in the field Q(sqrt(41)): the critical density
is 11/12 - sqrt(41)/12, and every downstream comparison (choice of k, choice
of L, final bound comparison) is decided exactly by rationalizing to
a + b*sqrt(41) and comparing squares.  Reported decimals are produced
separately at 50-digit precision; float entry points use plain float
arithmetic so the two routes stay independent checks of one another.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import sympy

from .complexes import VanKampenDiagram, ref_edge

# Scale tying the thin-triangle constant to the neighbourhood radii used in
# the stability arguments; the four-point-definition variant is 100.
SLIMNESS_SCALE = 800
SLIMNESS_SCALE_4POINT = 100

GEODESIC_A = "geodesic1"
GEODESIC_B = "geodesic2"
CONNECTOR = "connector"

_SQ41 = sympy.sqrt(41)
_D_CRIT = sympy.Rational(11, 12) - _SQ41 / 12


def _sign41(expr) -> int:
    """Exact sign of an element of Q(sqrt(41))."""
    e = sympy.expand(sympy.radsimp(sympy.together(sympy.sympify(expr))))
    b = sympy.Rational(e.coeff(_SQ41))
    a = sympy.Rational(sympy.expand(e - b * _SQ41))
    if b == 0:
        return 0 if a == 0 else (1 if a > 0 else -1)
    if a == 0:
        return 1 if b > 0 else -1
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # opposite signs: compare a^2 against 41 b^2 on the positive term's side
    if a * a == 41 * b * b:
        raise ArithmeticError("sqrt(41) is irrational; exact tie impossible")
    bigger_rational = a * a > 41 * b * b
    if a > 0:
        return 1 if bigger_rational else -1
    return -1 if bigger_rational else 1


def _as_fraction(x, name: str) -> Fraction:
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"{name} must be finite")
        return Fraction(str(x))
    return Fraction(x)


def _lhs_exact(dp):
    return 4 * (3 * dp - 1) / (3 * (1 - 2 * dp))


def _rhs_exact(dp):
    return 2 - 3 * dp


def _d_prime_exact(d0: Fraction):
    return (sympy.Rational(d0) + _D_CRIT) / 2


def d_crit() -> float:
    """The density below which the whole pipeline can be closed."""
    return float(sympy.N(_D_CRIT, 30))


def d_crit_digits(digits: int = 50) -> str:
    return str(sympy.N(_D_CRIT, digits))


def lhs(dp) -> float | Fraction:
    """4(3dp-1)/(3(1-2dp)); defined left of the pole at 1/2.

    Rational input gets an exact rational answer, float input a float.
    """
    if isinstance(dp, float):
        if dp >= 0.5:
            raise ValueError("lhs has a pole at 1/2; need dp < 1/2")
        return 4 * (3 * dp - 1) / (3 * (1 - 2 * dp))
    dp = Fraction(dp)
    if dp >= Fraction(1, 2):
        raise ValueError("lhs has a pole at 1/2; need dp < 1/2")
    return 4 * (3 * dp - 1) / (3 * (1 - 2 * dp))


def rhs(dp) -> float | Fraction:
    """2 - 3dp."""
    if isinstance(dp, float):
        return 2 - 3 * dp
    return 2 - 3 * Fraction(dp)


def _require_subcritical(d0: Fraction) -> None:
    if _sign41(_D_CRIT - sympy.Rational(d0)) <= 0:
        raise ValueError(f"d0 = {d0} is not below the critical density")


def d_prime(d0) -> float:
    """Midpoint of d0 and the critical density."""
    d0 = _as_fraction(d0, "d0")
    _require_subcritical(d0)
    return float(sympy.N(_d_prime_exact(d0), 30))


def min_k(d0) -> int:
    """Smallest k >= 1 with lhs(d') < rhs(d') - 1/k, d' the midpoint."""
    d0 = _as_fraction(d0, "d0")
    _require_subcritical(d0)
    dp = _d_prime_exact(d0)
    gap = _rhs_exact(dp) - _lhs_exact(dp)
    k = 1
    while _sign41(gap - sympy.Rational(1, k)) <= 0:
        k += 1
        if k > 10**6:
            raise ArithmeticError("no k found; gap should be positive")
    return k


def delta_hyp(d) -> Fraction:
    """12/(1-2d), the thin-triangle constant in terms of density."""
    d = _as_fraction(d, "d")
    if d >= Fraction(1, 2):
        raise ValueError("delta_hyp has a pole at 1/2; need d < 1/2")
    return 12 / (1 - 2 * d)


def e1_bound(dp, L: int, A1=0) -> float | Fraction:
    """lhs(dp) * 2L + A1: the budget for one-neighbour boundary edges."""
    if L < 1:
        raise ValueError("L must be at least 1")
    return lhs(dp) * 2 * L + (A1 if isinstance(dp, float) else _as_fraction(A1, "A1"))


@dataclass(frozen=True)
class ConstantsReport:
    d0: Fraction
    d_crit: float
    d_prime: float
    delta: Fraction
    k: int
    A1: Fraction
    A2: Fraction
    A3: Fraction
    long_constant: int
    L: int
    N: int
    lower_bound: float
    upper_bound: float
    precise: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.k < 1 or self.L < 1 or self.N < 1:
            raise ValueError("k, L, N must be positive")
        if not (self.upper_bound < self.lower_bound):
            raise ValueError("the closing inequality failed at the chosen parameters")
        for name in ("d_crit", "d_prime", "lower_bound", "upper_bound"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def to_json_dict(self) -> dict:
        return {
            "d0": str(self.d0),
            "d_crit": self.d_crit,
            "d_prime": self.d_prime,
            "delta": str(self.delta),
            "k": self.k,
            "A1": str(self.A1),
            "A2": str(self.A2),
            "A3": str(self.A3),
            "long_constant": self.long_constant,
            "L": self.L,
            "N": self.N,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "precise": dict(self.precise),
        }


def constants_pipeline(
    d0, A1=0, A2=0, long_constant: int = SLIMNESS_SCALE, digits: int = 50
) -> ConstantsReport:
    """Derive (d', delta, k, L, N) and evaluate the two closing bounds.

    L is the smallest integer at least ceil(4*long_constant*delta
    + 4*delta + 2) for which the upper estimate C(k+1,2)*(lhs(d')*2L + A1)
    stays strictly below the lower estimate
    (3/2)(1-2d')*C(k+1,2)*2L + (k+1)(k-2)L/2 + A2; the final count is
    N = k*(L + 2*long_constant*delta)^2.  With A1 = A2 = 0 the choice of k
    already makes every L work, so the floor binds.
    """
    d0 = _as_fraction(d0, "d0")
    A1 = _as_fraction(A1, "A1")
    A2 = _as_fraction(A2, "A2")
    if long_constant < 1:
        raise ValueError("long_constant must be positive")
    if digits < 1:
        raise ValueError("digits must be positive")
    _require_subcritical(d0)
    delta = delta_hyp(d0)
    k = min_k(d0)
    pairs = k * (k + 1) // 2  # C(k+1, 2)
    A3 = pairs * A1 - A2

    dp = _d_prime_exact(d0)
    lhs_dp = _lhs_exact(dp)
    lower_coeff = (
        2 * pairs * sympy.Rational(3, 2) * (1 - 2 * dp)
        + sympy.Rational((k + 1) * (k - 2), 2)
    )
    upper_coeff = 2 * pairs * lhs_dp
    # margin(L) = lower(L) - upper(L) = (lower_coeff - upper_coeff)*L + A2 - pairs*A1
    alpha = lower_coeff - upper_coeff
    if _sign41(alpha) <= 0:
        raise ArithmeticError("per-L margin should grow; k selection is broken")
    floor_L = math.ceil(4 * long_constant * delta + 4 * delta + 2)
    L = max(floor_L, int(sympy.N(sympy.Rational(A3) / alpha, 30)) if A3 > 0 else floor_L)

    def closes(candidate: int) -> bool:
        return _sign41(alpha * candidate - sympy.Rational(A3)) > 0

    while not closes(L):
        L += 1
    while L > floor_L and closes(L - 1):
        L -= 1

    lower_exact = lower_coeff * L + sympy.Rational(A2)
    upper_exact = upper_coeff * L + pairs * sympy.Rational(A1)

    reach = Fraction(L) + 2 * long_constant * delta
    n_exact = k * reach * reach
    N = math.ceil(n_exact)

    precise = {
        "d_crit": d_crit_digits(digits),
        "d_prime": str(sympy.N(dp, digits)),
        "lhs_d_prime": str(sympy.N(lhs_dp, digits)),
        "rhs_d_prime": str(sympy.N(_rhs_exact(dp), digits)),
        "lower_bound": str(sympy.N(lower_exact, digits)),
        "upper_bound": str(sympy.N(upper_exact, digits)),
        "N_exact": str(n_exact),
    }
    return ConstantsReport(
        d0=d0,
        d_crit=d_crit(),
        d_prime=float(sympy.N(dp, 30)),
        delta=delta,
        k=k,
        A1=A1,
        A2=A2,
        A3=A3,
        long_constant=long_constant,
        L=L,
        N=N,
        lower_bound=float(sympy.N(lower_exact, 30)),
        upper_bound=float(sympy.N(upper_exact, 30)),
        precise=precise,
    )


def constants_sweep(d0_values: Sequence, A1=0, A2=0, long_constant: int = SLIMNESS_SCALE) -> list[dict]:
    """(d0, k, L, N) rows over a grid of subcritical densities."""
    rows = []
    for d0 in d0_values:
        report = constants_pipeline(d0, A1, A2, long_constant)
        rows.append(
            {"d0": str(report.d0), "k": report.k, "L": report.L, "N": report.N}
        )
    return rows


# ---------------------------------------------------------------------------
# boundary partition of a geodesic-sided diagram


def partition_boundary(D: VanKampenDiagram, side_marks: Sequence[str]) -> tuple[int, int, int]:
    """Sort boundary edges into connector (E0) and geodesic (E1/E2) classes.

    ``side_marks[i]`` marks ``D.boundary[i]`` as lying on the first geodesic
    side, the second, or a connector.  Each geodesic side must form one
    contiguous cyclic run (connectors may be empty).  A geodesic edge counts
    as E2 when the third vertex of its face lies on a geodesic side, E1
    otherwise.
    """
    marks = list(side_marks)
    B = D.boundary_length
    if len(marks) != B:
        raise ValueError("need exactly one mark per boundary edge")
    allowed = {GEODESIC_A, GEODESIC_B, CONNECTOR}
    if not set(marks) <= allowed:
        raise ValueError(f"marks must be drawn from {sorted(allowed)}")
    for kind in (GEODESIC_A, GEODESIC_B):
        positions = [i for i, mk in enumerate(marks) if mk == kind]
        if not positions:
            raise ValueError(f"boundary needs a nonempty {kind} side")
        runs = sum(
            1
            for i in positions
            if marks[(i - 1) % B] != kind
        )
        if runs != 1:
            raise ValueError(f"{kind} side must be one contiguous arc")

    face_of_edge: dict[int, int] = {}
    for f, walk in enumerate(D.faces):
        for r in walk:
            face_of_edge.setdefault(ref_edge(r), f)

    geodesic_vertices = set()
    for i, mk in enumerate(marks):
        if mk != CONNECTOR:
            geodesic_vertices.add(D.ref_tail(D.boundary[i]))
            geodesic_vertices.add(D.ref_head(D.boundary[i]))

    e0 = e1 = e2 = 0
    for i, mk in enumerate(marks):
        if mk == CONNECTOR:
            e0 += 1
            continue
        e = ref_edge(D.boundary[i])
        walk = D.faces[face_of_edge[e]]
        j = next(t for t, r in enumerate(walk) if ref_edge(r) == e)
        third = D.ref_head(walk[(j + 1) % 3])
        if third in geodesic_vertices:
            e2 += 1
        else:
            e1 += 1
    return e0, e1, e2
