"""Stability conditions, non-stabilizability classifiers and drift certificates.

Every membership predicate is decided in exact rational arithmetic.  Subset
enumerations scale all masses by a common denominator and work on integer
arrays, falling back to Python integers when the scaled values could
overflow 64 bits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import hypergraph as hg
from .dynamics import PolicySpec
from .hypergraph import Hypergraph, TooLarge
from .measures import Measure, order_stats, uniform
from .oracle import drift_slopes, rational_str

__all__ = [
    "AlphaOutOfRange",
    "BadFamily",
    "ConditionVerdict",
    "InstabilityTrigger",
    "DriftCoefficients",
    "LyapunovWitness",
    "N1_GUARD",
    "check_N1",
    "check_N2",
    "check_N3",
    "classify_nonstabilizable",
    "uniform_measure_remark",
    "hall_instability",
    "complete3_region",
    "lyapunov_witness",
    "auxiliary_drift",
    "complete_minus_family",
    "lambda_closed_form",
    "nu_closed_form",
    "drift_coefficients",
    "a_bound",
    "check_S_S1",
    "analyze",
]

N1_GUARD = 20


class AlphaOutOfRange(ValueError):
    pass


class BadFamily(ValueError):
    pass


def _jsonable(x):
    if isinstance(x, Fraction):
        return rational_str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


@dataclass(frozen=True)
class ConditionVerdict:
    """Membership of the measure in one named condition set."""

    condition: str
    member: bool
    witness: Optional[dict] = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {"condition": self.condition, "member": self.member, "witness": _jsonable(self.witness)}
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class InstabilityTrigger:
    rule: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"rule": self.rule, "details": _jsonable(self.details)}


# --------------------------------------------------------------------------
# necessary conditions


def _exact(m: Measure) -> tuple[Fraction, ...]:
    return m.as_exact().probs


def _scaled(m: Measure):
    """Integer masses ``w`` and denominator ``D`` with ``mu(i) = w[i] / D``."""
    probs = _exact(m)
    D = 1
    for p in probs:
        D = D * p.denominator // math.gcd(D, p.denominator)
    return [int(p * D) for p in probs], D


def _mask_array(q: int, lo: int, hi: int) -> np.ndarray:
    """0/1 membership matrix of the masks ``lo..hi-1``, shape (n, q)."""
    masks = np.arange(lo, hi, dtype=np.int64)
    return ((masks[:, None] >> np.arange(q, dtype=np.int64)[None, :]) & 1).astype(np.int64)


def _smallest_mask(masks) -> int:
    """Mask minimising (size, sorted node tuple)."""
    return min((int(b) for b in masks), key=lambda b: (bin(b).count("1"), hg._nodes(b)))


def _int_dtype(bound: int):
    return np.int64 if bound < 2**62 else object


def check_N1(h: Hypergraph, m: Measure) -> tuple[ConditionVerdict, ConditionVerdict, ConditionVerdict]:
    """Exhaustive subset tests for the three flow conditions (plus, minus, minus-minus).

    * plus: for every nonempty B (V included), mu(B) <= sum_H |H & B| min_H mu.
    * minus: the same with strict inequality, for B meeting some hyperedge
      in at least two nodes.
    * minus-minus: for every nonempty proper B, mu(B) < sum_H |H & B|
      min over H minus B; an H inside B makes the right side infinite.

    Witnesses are the violating B of smallest size, then smallest in
    lexicographic order.
    """
    q = h.q
    if q > N1_GUARD:
        raise TooLarge(f"q={q} exceeds subset guard {N1_GUARD}")
    w, D = _scaled(m)
    dtype = _int_dtype(D * q * h.m * h.rank + 1)
    wv = np.array(w, dtype=dtype)
    edge_min = [min(w[i - 1] for i in e) for e in h.hyperedges]
    c = np.zeros(q, dtype=dtype)
    for e, mn in zip(h.hyperedges, edge_min):
        for i in e:
            c[i - 1] += mn
    full = (1 << q) - 1
    bad_plus, bad_minus, bad_mm = [], [], []
    chunk = 1 << 16
    for lo in range(1, full + 1, chunk):
        hi = min(lo + chunk, full + 1)
        B = _mask_array(q, lo, hi).astype(dtype)
        ids = np.arange(lo, hi, dtype=np.int64)
        lhs = B @ wv
        rhs = B @ c
        bad_plus.extend(ids[lhs > rhs].tolist())
        meet = np.stack([B[:, [i - 1 for i in e]].sum(axis=1) for e in h.hyperedges], axis=1)
        in_c2 = (meet >= 2).any(axis=1)
        bad_minus.extend(ids[in_c2 & (lhs >= rhs)].tolist())
        # minus-minus: per-edge min over the part outside B
        rhs2 = np.zeros(len(ids), dtype=dtype)
        vacuous = np.zeros(len(ids), dtype=bool)
        for k, e in enumerate(h.hyperedges):
            order = sorted(e, key=lambda i: -w[i - 1])
            val = np.full(len(ids), -1, dtype=dtype)
            for i in order:
                val = np.where(B[:, i - 1] == 0, w[i - 1], val)
            inside = val == -1
            vacuous |= inside & (meet[:, k] > 0)
            rhs2 = rhs2 + np.where(inside, 0, meet[:, k] * val)
        proper = ids != full
        bad_mm.extend(ids[proper & ~vacuous & (lhs >= rhs2)].tolist())

    def verdict(name, bad, sense):
        if not bad:
            return ConditionVerdict(name, True)
        b = _smallest_mask(bad)
        nodes = hg._nodes(b)
        lhs = sum(Fraction(w[i - 1], D) for i in nodes)
        return ConditionVerdict(name, False, {"B": list(nodes), "mu_B": lhs, "relation": sense,
                                              "rhs": _n1_rhs(h, w, D, b, name)})

    return (
        verdict("N1_plus", bad_plus, "mu(B) > rhs"),
        verdict("N1_minus", bad_minus, "mu(B) >= rhs"),
        verdict("N1_minusminus", bad_mm, "mu(B) >= rhs"),
    )


def _n1_rhs(h, w, D, b, name):
    nodes = set(hg._nodes(b))
    total = Fraction(0)
    for e in h.hyperedges:
        k = len(nodes.intersection(e))
        if not k:
            continue
        pool = e if name != "N1_minusminus" else [i for i in e if i not in nodes]
        total += k * Fraction(min(w[i - 1] for i in pool), D)
    return total


def check_N2(h: Hypergraph, m: Measure) -> ConditionVerdict:
    """Every transversal carries mass above ``1/r``.

    Mass only grows under supersets, so it is enough to test the
    inclusion-minimal transversals.  The witness is the lightest one.
    """
    probs = _exact(m)
    r = h.rank
    worst = None
    for t in hg.minimal_transversals(h, "inclusion_minimal"):
        mt = sum(probs[i - 1] for i in t)
        key = (mt, len(t), t)
        if worst is None or key < worst:
            worst = key
    if worst[0] > Fraction(1, r):
        return ConditionVerdict("N2", True)
    return ConditionVerdict("N2", False, {"T": list(worst[2]), "mu_T": worst[0], "bound": Fraction(1, r)})


def check_N3(h: Hypergraph, m: Measure) -> tuple[ConditionVerdict, ConditionVerdict]:
    """Per-node bound ``mu(i) <= 1/a`` (plus) and ``mu(i) < 1/a`` (minus)."""
    probs = _exact(m)
    bound = Fraction(1, h.anti_rank)
    top = max(h.nodes, key=lambda i: (probs[i - 1], -i))
    wit = {"node": top, "mu": probs[top - 1], "bound": bound}
    plus = ConditionVerdict("N3_plus", probs[top - 1] <= bound, None if probs[top - 1] <= bound else wit)
    minus = ConditionVerdict("N3_minus", probs[top - 1] < bound, None if probs[top - 1] < bound else wit)
    return plus, minus


# --------------------------------------------------------------------------
# non-stabilizability


def _degree_one_witness(h: Hypergraph) -> Optional[dict]:
    deg = h.degrees()
    ones = {i for i in h.nodes if deg[i - 1] == 1}
    if not ones:
        return None
    edges = [(e, ones.intersection(e)) for e in h.hyperedges]
    for size in range(1, h.q + 1):
        for B in itertools.combinations(h.nodes, size):
            bs = set(B)
            touched = [(e, d1) for e, d1 in edges if bs.intersection(e)]
            if not touched or not all(d1 for _, d1 in touched):
                continue
            outside = sorted(i for _, d1 in touched for i in d1 if i not in bs)
            if outside:
                return {"B": list(B), "edges": [list(e) for e, _ in touched], "degree_one_outside": sorted(set(outside))}
    return None


def classify_nonstabilizable(h: Hypergraph, ordering: Optional[Sequence[int]] = None,
                             l: Optional[int] = None) -> list[InstabilityTrigger]:
    """Measure-free obstructions: each one rules out stability for every policy.

    An empty list only means that none of the known obstructions applies.
    The cycle rule needs an ordering and overlap, either passed in or
    attached to the hypergraph by the cycle generator.
    """
    out = []
    deg = h.degrees()
    for e in h.hyperedges:
        iso = [i for i in e if deg[i - 1] == 1]
        if len(iso) >= 2:
            out.append(InstabilityTrigger("two_isolated_nodes", {"edge": list(e), "nodes": iso}))
            break
    prof = hg.profile(h)
    if h.is_uniform and prof.transversal_number == 1:
        t = hg.minimal_transversals(h, "minimum_cardinality")[0]
        out.append(InstabilityTrigger("uniform_star_tau1", {"node": t[0]}))
    wit = _degree_one_witness(h)
    if wit is not None:
        out.append(InstabilityTrigger("degree_one_witness", wit))
    part = hg.detect_partitions(h)
    if part.kind == "k_partite":
        out.append(InstabilityTrigger("r_uniform_k_partite", {"k": part.k, "parts": [list(p) for p in part.parts]}))
    if part.bipartite is not None:
        v1, v2 = part.bipartite
        out.append(InstabilityTrigger("r_uniform_bipartite", {"V1": list(v1), "V2": list(v2)}))
    if ordering is None and h.cycle_hint is not None:
        ordering, l = h.cycle_hint
    if ordering is not None and h.is_uniform:
        if l is None:
            raise ValueError("a cycle ordering needs its overlap l")
        r = h.rank
        if 0 < l < r and hg.verify_cycle(h, ordering, l) and h.q % r == 0:
            parts = [[ordering[i + j * r] for j in range(h.q // r)] for i in range(r)]
            out.append(InstabilityTrigger("cycle_r_divides_q", {"r": r, "q": h.q, "l": l,
                                                                "ordering": list(ordering), "parts": parts}))
    return out


def uniform_measure_remark(h: Hypergraph) -> Optional[InstabilityTrigger]:
    """``tau <= q/r`` rules out the uniform measure for every policy."""
    tau = hg.transversal_number(h)
    if tau * h.rank <= h.q:
        t = hg.minimal_transversals(h, "minimum_cardinality")[0]
        return InstabilityTrigger("uniform_measure_transversal", {"tau": tau, "q": h.q, "r": h.rank, "T": list(t)})
    return None


def hall_instability(h: Hypergraph, m: Measure) -> Optional[InstabilityTrigger]:
    """Hall violation together with the spread bound mu_min/mu_max > (f-1)/f.

    ``f = floor((q+1)/2)``.  When the bound holds, the measure is checked to
    be strictly monotone in set size (a larger set always weighs more).
    """
    res = hg.check_hall(h)
    if res.satisfied:
        return None
    mn, mx, _ = order_stats(m.as_exact())
    f = (h.q + 1) // 2
    threshold = Fraction(f - 1, f)
    if not mn / mx > threshold:
        return None
    srt = sorted(_exact(m))
    # the heaviest k-1 nodes must weigh less than the lightest k, for every k
    for k in range(1, h.q + 1):
        if not sum(srt[:k]) > sum(srt[h.q - k + 1:]):
            raise AssertionError(f"monotonicity fails at size {k} although the spread bound holds")
    return InstabilityTrigger("hall_ratio", {"V1": list(res.v1), "V2": list(res.v2), "ratio": mn / mx,
                                             "threshold": threshold})


def _is_complete(h: Hypergraph, r: int) -> bool:
    return h.is_uniform and h.rank == r and h.m == math.comb(h.q, r)


def complete3_region(h: Hypergraph, m: Measure) -> str:
    """``"stable"``, ``"not_stable"`` or ``"inapplicable"``."""
    if not (_is_complete(h, 3) and h.q >= 4):
        return "inapplicable"
    return "stable" if all(p < Fraction(1, 3) for p in _exact(m)) else "not_stable"


# --------------------------------------------------------------------------
# Lyapunov witness for the planar auxiliary chain


@dataclass(frozen=True)
class LyapunovWitness:
    """Quadratic form ``u x^2 + u y^2 + w x y`` for the planar chain.

    ``inequalities`` holds, in order, the interior pair, the first-axis
    value and the second-axis value.  The last one pairs the second-axis
    vertical drift with its own horizontal drift; ``fourth_as_printed``
    records the variant that pairs it with the interior drift, which is
    positive and therefore cannot be the intended inequality.
    """

    alpha: float
    u: float
    w: float
    w_interval: tuple[float, float]
    inequalities: tuple[float, float, float, float]
    fourth_as_printed: float
    positive_definite: bool

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "u": self.u,
            "w": self.w,
            "w_interval": list(self.w_interval),
            "inequalities": list(self.inequalities),
            "fourth_as_printed": self.fourth_as_printed,
            "positive_definite": self.positive_definite,
        }


def lyapunov_witness(alpha) -> LyapunovWitness:
    a = Fraction(alpha) if isinstance(alpha, (int, Fraction)) else Fraction(repr(float(alpha)))
    if not 0 < a < Fraction(1, 3):
        raise AlphaOutOfRange(f"alpha must lie in (0, 1/3), got {alpha}")
    u = (1 - 3 * a) / 2
    lo, hi = 3 * a - 1, (3 * a - 1) * a / (1 - a)
    w = (lo + hi) / 2
    dx = dy = 3 * a - 1
    d1x, d1y = a, 1 - a
    d2x, d2y = 1 - a, a
    vals = (2 * u * dx + w * dy, 2 * u * dy + w * dx, 2 * u * d1x + w * d1y, 2 * u * d2y + w * d2x)
    printed = 2 * u * d2y + w * dx
    if not all(v < 0 for v in vals):
        raise AssertionError(f"drift inequalities fail at alpha={alpha}: {vals}")
    if not 4 * u * u > w * w:
        raise AssertionError(f"quadratic form not positive definite at alpha={alpha}")
    return LyapunovWitness(float(a), float(u), float(w), (float(lo), float(hi)),
                           tuple(float(v) for v in vals), float(printed), True)


def auxiliary_drift(alpha: float, x: int, y: int, witness: Optional[LyapunovWitness] = None) -> float:
    """Expected one-step change of ``sqrt(Q)`` for the planar chain at ``(x, y)``."""
    wt = witness or lyapunov_witness(alpha)
    u, w, a = wt.u, wt.w, alpha

    def L(px, py):
        return math.sqrt(u * px * px + u * py * py + w * px * py)

    here = L(x, y)
    if x > 0 and y > 0:
        moves = [(a, x + 1, y), (a, x, y + 1), (1 - 2 * a, x - 1, y - 1)]
    elif x > 0:
        moves = [(a, x + 1, 0), (1 - a, x, 1)]
    elif y > 0:
        moves = [(a, 0, y + 1), (1 - a, 1, y)]
    else:
        raise ValueError("the origin has arbitrary transitions")
    return sum(p * (L(px, py) - here) for p, px, py in moves)


# --------------------------------------------------------------------------
# incomplete 3-uniform hypergraphs


def complete_minus_family(h: Hypergraph) -> tuple[tuple[int, ...], ...]:
    """Removed triples if ``h`` is the complete 3-uniform hypergraph minus disjoint triples."""
    if not (h.is_uniform and h.rank == 3 and h.q >= 5):
        raise BadFamily("expected a 3-uniform hypergraph on at least 5 nodes")
    present = set(h.hyperedges)
    missing = tuple(e for e in itertools.combinations(h.nodes, 3) if e not in present)
    seen: set[int] = set()
    for e in missing:
        if seen.intersection(e):
            raise BadFamily(f"removed triples are not pairwise disjoint (at {list(e)})")
        seen.update(e)
    return missing


def lambda_closed_form(m: Measure, i: int) -> Fraction:
    """Four-step growth rate of the quadratic drift along ``x e_i``, node outside J.

    Sums run over indices distinct from each other and from ``i``; the
    ``-8`` term is over ordered pairs and the others over unordered sets.
    """
    M = dict(zip(range(1, m.q + 1), _exact(m)))
    o = [j for j in M if j != i]
    mi = M[i]
    C = itertools.combinations
    t = 8 * mi**4 + 24 * mi**3 * sum(M[j] for j in o) + 24 * mi**2 * sum(M[j] ** 2 for j in o)
    t += 8 * mi * sum(M[j] ** 3 for j in o)
    t += 24 * mi**2 * sum(M[j] * M[k] for j, k in C(o, 2))
    t -= 44 * sum(M[j] ** 2 * M[k] * M[l] for j in o for k, l in C([x for x in o if x != j], 2))
    t -= 24 * sum(M[j] ** 2 * M[k] ** 2 for j, k in C(o, 2))
    t -= 8 * sum(M[j] * M[k] ** 3 for j, k in itertools.permutations(o, 2))
    t -= 96 * sum(M[a] * M[b] * M[c] * M[d] for a, b, c, d in C(o, 4))
    return t


def nu_closed_form(m: Measure, i: int, H: Sequence[int]) -> Fraction:
    """Four-step growth rate along ``x e_i`` for ``i`` in a removed triple ``H``.

    ``P`` is the pair ``H - {i}`` and ``Hb`` the complement of ``H``.  Terms
    that are split by the last arrivals of the word are merged here, which
    is what the exact enumeration confirms.
    """
    M = dict(zip(range(1, m.q + 1), _exact(m)))
    P = [x for x in H if x != i]
    Hb = [x for x in M if x not in H]
    o = [x for x in M if x != i]
    j, k = P
    mi = M[i]
    C, Pm = itertools.combinations, itertools.permutations
    t = 8 * mi**4 + 24 * mi**3 * sum(M[l] for l in o) + 24 * mi**2 * sum(M[l] ** 2 for l in o)
    t += 8 * mi * sum(M[l] ** 3 for l in o)
    t -= 8 * sum(M[a] * M[l] ** 3 for a in P for l in Hb)
    t -= 24 * sum(M[a] * M[b] ** 2 * M[l] for a, b in Pm(P, 2) for l in Hb)
    t -= 48 * M[j] * M[k] * sum(M[l] ** 2 for l in Hb)
    t -= 44 * sum(M[a] * M[l] ** 2 * M[n] for a in P for l, n in Pm(Hb, 2))
    t += 48 * mi**2 * M[j] * M[k]
    t -= 88 * M[j] * M[k] * sum(M[l] * M[n] for l, n in C(Hb, 2))
    t -= 96 * sum(M[a] * M[l] * M[n] * M[p] for a in P for l, n, p in C(Hb, 3))
    t += 24 * mi**2 * sum(M[a] * M[l] for a in P for l in Hb)
    t += 24 * mi**2 * sum(M[l] * M[n] for l, n in C(Hb, 2))
    t -= 24 * sum(M[a] ** 2 * M[l] ** 2 for a in P for l in Hb)
    t -= 44 * sum(M[a] ** 2 * M[l] * M[n] for a in P for l, n in C(Hb, 2))
    t -= 8 * sum(M[a] ** 3 * M[l] for a in P for l in Hb)
    t += 24 * mi * sum(M[a] * M[b] ** 2 for a, b in Pm(P, 2))
    t -= 8 * sum(M[l] ** 3 * M[n] for l, n in Pm(Hb, 2))
    t -= 24 * sum(M[l] ** 2 * M[n] ** 2 for l, n in C(Hb, 2))
    t -= 44 * sum(M[l] ** 2 * M[n] * M[p] for l in Hb for n, p in C([x for x in Hb if x != l], 2))
    t -= 96 * sum(M[a] * M[b] * M[c] * M[d] for a, b, c, d in C(Hb, 4))
    return t


@dataclass
class DriftCoefficients:
    """Growth rates of the quadratic drift on a complete-minus hypergraph.

    ``lambda_i``/``nu_i`` come from the exact four-step enumeration and
    ``*_closed`` from the closed forms.  Pair and triple rates are one-step
    values; the four-step chain multiplies them by 4.
    """

    J_family: tuple[tuple[int, ...], ...]
    J: tuple[int, ...]
    lambda_i: dict
    nu_i: dict
    lambda_i_closed: dict
    nu_i_closed: dict
    lambda_ij: dict
    nu_ij: dict
    alpha_triple: dict

    def to_dict(self) -> dict:
        return _jsonable({
            "J_family": [list(e) for e in self.J_family],
            "J": list(self.J),
            "lambda_i": self.lambda_i,
            "nu_i": self.nu_i,
            "lambda_i_closed": self.lambda_i_closed,
            "nu_i_closed": self.nu_i_closed,
            "lambda_ij": {f"{i},{j}": v for (i, j), v in self.lambda_ij.items()},
            "nu_ij": {f"{i},{j}": v for (i, j), v in self.nu_ij.items()},
            "alpha_triple": {f"{''.join(map(str, H))}:k={k}": list(v) for (H, k), v in self.alpha_triple.items()},
        })


def drift_coefficients(h: Hypergraph, m: Measure, oracle: bool = True) -> DriftCoefficients:
    fam = complete_minus_family(h)
    probs = _exact(m)
    mu = dict(zip(h.nodes, probs))
    owner = {i: e for e in fam for i in e}
    J = tuple(sorted(owner))
    lam, nu, lam_c, nu_c = {}, {}, {}, {}
    for i in h.nodes:
        if i in owner:
            nu_c[i] = nu_closed_form(m, i, owner[i])
        else:
            lam_c[i] = lambda_closed_form(m, i)
        if oracle:
            slope = drift_slopes(h, m, (i,), steps=4, policy=PolicySpec("ml")).slopes[i]
            (nu if i in owner else lam)[i] = slope
    lam_ij, nu_ij = {}, {}
    for i, j in itertools.permutations(h.nodes, 2):
        H = owner.get(i)
        if H is not None and j in H:
            nu_ij[(i, j)] = 2 * (mu[i] - sum(mu[l] for l in h.nodes if l not in H))
        else:
            lam_ij[(i, j)] = 2 * (mu[i] - sum(mu[l] for l in h.nodes if l not in (i, j)))
    alpha = {}
    for H in fam:
        out = sum(mu[l] for l in h.nodes if l not in H)
        for k in H:
            i, j = [x for x in H if x != k]
            alpha[(H, k)] = (2 * (mu[i] - out), 2 * (mu[j] - out), 2 * mu[k])
    return DriftCoefficients(fam, J, lam, nu, lam_c, nu_c, lam_ij, nu_ij, alpha)


def a_bound(q: int) -> Fraction:
    """Bound on ``(mu_max/mu_min)^4`` for the spread set."""
    return Fraction(2 * q**4 - 9 * q**3 + 12 * q**2 - 13 * q + 12, 6 * q**2 + 10 * q + 24)


def check_S_S1(h: Hypergraph, m: Measure, assignment: str = "proof", with_S: bool = True,
               n2: Optional[ConditionVerdict] = None) -> dict:
    """Verdicts for the drift set S, the spread set A and S1 = A & N2 & N3-.

    With ``assignment="proof"`` the coefficient of node ``i`` is the
    four-step rate along ``x e_i``: the lambda form outside J and the nu
    form inside.  ``assignment="display"`` evaluates the lambda closed form
    on J and keeps the enumerated rate on the complement, where no nu form
    is defined.
    """
    if assignment not in ("proof", "display"):
        raise ValueError("assignment must be 'proof' or 'display'")
    fam = complete_minus_family(h)
    n2 = n2 or check_N2(h, m)
    n3m = check_N3(h, m)[1]
    mn, mx, _ = order_stats(m.as_exact())
    ratio4 = (mx / mn) ** 4
    bound = a_bound(h.q)
    in_A = ratio4 < bound
    A = ConditionVerdict("A", in_A, None if in_A else {"ratio": mx / mn, "ratio_pow4": ratio4, "bound_pow4": bound})
    s1_member = in_A and n2.member and n3m.member
    S1 = ConditionVerdict("S1", s1_member, None if s1_member else {
        "failed": [v.condition for v in (A, n2, n3m) if not v.member]})
    out = {"A": A, "S1": S1}
    if with_S:
        dc = drift_coefficients(h, m, oracle=True)
        coeff = {**dc.lambda_i, **dc.nu_i}
        if assignment == "display":
            for i in dc.J:
                coeff[i] = lambda_closed_form(m, i)
        worst = max(coeff, key=lambda i: (coeff[i], -i))
        drift_ok = coeff[worst] < 0
        member = drift_ok and n2.member and n3m.member
        wit = None
        if not member:
            wit = {"node": worst, "coefficient": coeff[worst],
                   "failed": [name for name, ok in (("drift", drift_ok), ("N2", n2.member), ("N3_minus", n3m.member))
                              if not ok]}
        note = f"assignment={assignment}"
        if s1_member and not member:
            note += "; S1 member outside S"
        out["S"] = ConditionVerdict("S", member, wit, note)
        out["coefficients"] = dc
    return out


# --------------------------------------------------------------------------
# report


def analyze(h: Hypergraph, m: Measure, assignment: str = "proof", ordering=None, l=None,
            with_S: bool = True) -> dict:
    """Structural profile, every applicable condition, trigger and region."""
    prof = hg.profile(h)
    n1 = check_N1(h, m)
    n2 = check_N2(h, m)
    n3 = check_N3(h, m)
    conditions = [*n1, n2, *n3]
    triggers = classify_nonstabilizable(h, ordering, l)
    for_mu = []
    if h.q <= hg.HALL_GUARD:
        hall = hall_instability(h, m)
        if hall is not None:
            for_mu.append(hall)
    remark = uniform_measure_remark(h)
    if remark is not None and m.as_exact() == uniform(h.q):
        for_mu.append(remark)
    regions = {"complete3": complete3_region(h, m)}
    try:
        ss = check_S_S1(h, m, assignment=assignment, with_S=with_S, n2=n2)
    except BadFamily:
        ss = None
    if ss is not None:
        for key in ("S", "A", "S1"):
            if key in ss:
                conditions.append(ss[key])
        if "coefficients" in ss:
            regions["drift_coefficients"] = ss["coefficients"].to_dict()
    return {
        "structural": prof.to_dict(),
        "conditions": [c.to_dict() for c in conditions],
        "triggers": [t.to_dict() for t in triggers],
        "instability_for_mu": [t.to_dict() for t in for_mu],
        "regions": regions,
    }
