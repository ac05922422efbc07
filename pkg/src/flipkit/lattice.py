"""Hidden-number-problem lattice construction, LLL reduction, and bounded
enumeration with a verification predicate.

Each leak sample gives a relation kappa_i + a_i = t_i * d (mod n) with
0 <= kappa_i < K. Eliminating d with sample 0 (t'_i = t_i / t_0,
a'_i = a_i - t'_i * a_0) leaves m-1 relations in the kappa_i alone, and the
rows

    [ n e_1 ; ... ; n e_{m-1} ;  t'_1 .. t'_{m-1} 1 0 ;  a'_1 .. a'_{m-1} 0 K ]

span a lattice of determinant n^(m-1) * K containing the target
(kappa_1, ..., kappa_{m-1}, kappa_0, -K), whose norm is at most
sqrt(m+1) * K. When that target is not below the Gaussian heuristic, plain
reduction is not enough and the solver enumerates short vectors, accepting
the first one whose implied key d satisfies d*G = Q.

All lattice arithmetic is exact integer; floating point appears only in the
Gram-Schmidt coefficients, with a rational fallback when the float pass
fails an exact size-reduction check afterwards.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .ecdsa import CurveParams, Point, inv_mod, scalar_mul
from .faults import LeakSample

Row = tuple[int, ...]

DEFAULT_NODE_BUDGET = 20_000_000


class LatticeError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class HnpInstance:
    modulus: int
    samples: tuple[tuple[int, int], ...]  # (t_i, a_i) in input order
    bound: int

    @property
    def m(self) -> int:
        return len(self.samples)


def build_instance(samples: Sequence[LeakSample], curve: CurveParams) -> HnpInstance:
    """Bundle recentered leak samples into an HNP instance."""
    if len(samples) < 2:
        raise LatticeError("need at least 2 samples")
    bounds = {s.bound for s in samples}
    if len(bounds) != 1:
        raise LatticeError(f"mixed bounds {sorted(bounds)}; recenter first")
    bound = bounds.pop()
    if not 0 < bound < curve.n:
        raise LatticeError(f"bound {bound} outside (0, n)")
    pairs = []
    for s in samples:
        if math.gcd(s.t, curve.n) != 1:
            raise LatticeError(f"sample t={s.t} not invertible mod n")
        pairs.append((s.t % curve.n, s.a % curve.n))
    return HnpInstance(curve.n, tuple(pairs), bound)


@dataclass(frozen=True, slots=True)
class LatticeBasis:
    rows: tuple[Row, ...]
    modulus: int
    bound: int
    t_prime: tuple[int, ...]
    a_prime: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.rows)


def build_lattice(inst: HnpInstance) -> LatticeBasis:
    """Eliminate d with sample 0 and emit the (m+1)-dimensional basis."""
    n, m, k_bound = inst.modulus, inst.m, inst.bound
    t0, a0 = inst.samples[0]
    t0_inv = inv_mod(t0, n)
    t_prime = tuple(t * t0_inv % n for t, _ in inst.samples[1:])
    a_prime = tuple(
        (a - tp * a0) % n for tp, (_, a) in zip(t_prime, inst.samples[1:])
    )
    dim = m + 1
    rows: list[list[int]] = []
    for j in range(m - 1):
        row = [0] * dim
        row[j] = n
        rows.append(row)
    rows.append(list(t_prime) + [1, 0])
    rows.append(list(a_prime) + [0, k_bound])
    return LatticeBasis(
        tuple(tuple(r) for r in rows), n, k_bound, t_prime, a_prime
    )


def gaussian_heuristic(m: int, n: int, bound: int) -> float:
    """sqrt((m+1)/(2 pi e)) * (n^(m-1) K)^(1/(m+1)), evaluated in log space."""
    if m < 2:
        raise LatticeError("need m >= 2")
    dim = m + 1
    log_vol = (m - 1) * math.log(n) + math.log(bound)
    return math.sqrt(dim / (2 * math.pi * math.e)) * math.exp(log_vol / dim)


def secret_norm_estimates(m: int, bound: int) -> tuple[float, float]:
    """(upper, expected) norm of the target: sqrt(m+1)*K is the worst case,
    sqrt((m+1)/3)*K the mean square of uniform [0, K) components."""
    if m < 2:
        raise LatticeError("need m >= 2")
    return math.sqrt(m + 1) * bound, math.sqrt((m + 1) / 3) * bound


# ---------------------------------------------------------------------------
# LLL
# ---------------------------------------------------------------------------

def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


class _FloatInstability(Exception):
    pass


def _lll_core(
    b: list[list[int]], delta: float, exact: bool, deep: bool = False
) -> list[list[int]]:
    """In-place LLL on integer rows; Gram-Schmidt data kept as floats or
    Fractions, updated incrementally on size-reduction and swaps.

    With deep=True, a row failing the exchange condition is inserted at the
    first position where it would shorten the projected basis (Schnorr and
    Euchner's deep-insertion variant). The output then still satisfies the
    plain LLL conditions, with a flatter Gram-Schmidt profile that
    enumeration benefits from enormously.
    """
    n = len(b)
    if n <= 1:
        return b
    conv: Callable = Fraction if exact else float
    mu: list[list] = [[conv(0)] * n for _ in range(n)]
    bstar: list = [conv(0)] * n
    bstar[0] = conv(_dot(b[0], b[0]))
    if bstar[0] == 0:
        raise LatticeError("linearly dependent rows")

    def size_reduce(k: int, l: int) -> None:
        if abs(mu[k][l]) > 0.5:
            q = round(mu[k][l])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            for j in range(l):
                mu[k][j] -= q * mu[l][j]
            mu[k][l] -= q

    def gso_row(k: int) -> None:
        for j in range(k):
            num = conv(_dot(b[k], b[j]))
            for l in range(j):
                num -= mu[j][l] * mu[k][l] * bstar[l]
            mu[k][j] = num / bstar[j]
        val = conv(_dot(b[k], b[k]))
        for j in range(k):
            val -= mu[k][j] * mu[k][j] * bstar[j]
        bstar[k] = val
        if exact:
            if val <= 0:
                raise LatticeError("linearly dependent rows")
        elif not val > 0:
            raise _FloatInstability

    kmax = 0
    k = 1
    if deep:
        while k < n:
            if k > kmax:
                kmax = k
                gso_row(k)
            for l in range(k - 1, -1, -1):
                size_reduce(k, l)
            c = conv(_dot(b[k], b[k]))
            i = 0
            while i < k:
                if delta * bstar[i] <= c:
                    c -= mu[k][i] * mu[k][i] * bstar[i]
                    i += 1
                else:
                    row = b.pop(k)
                    b.insert(i, row)
                    mu.insert(i, mu.pop(k))
                    bstar.insert(i, bstar.pop(k))
                    if i == 0:
                        bstar[0] = conv(_dot(b[0], b[0]))
                        if exact and bstar[0] == 0:
                            raise LatticeError("linearly dependent rows")
                        kmax = 0
                    else:
                        kmax = i - 1
                    k = max(i, 1)
                    break
            else:
                k += 1
        return b
    while k < n:
        if k > kmax:
            kmax = k
            gso_row(k)
        size_reduce(k, k - 1)
        if bstar[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1]:
            for l in range(k - 2, -1, -1):
                size_reduce(k, l)
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            for j in range(k - 1):
                mu[k][j], mu[k - 1][j] = mu[k - 1][j], mu[k][j]
            m_ = mu[k][k - 1]
            b_new = bstar[k] + m_ * m_ * bstar[k - 1]
            if exact:
                if b_new == 0:
                    raise LatticeError("linearly dependent rows")
            elif not b_new > 0:
                raise _FloatInstability
            mu[k][k - 1] = m_ * bstar[k - 1] / b_new
            bstar[k] = bstar[k - 1] * bstar[k] / b_new
            bstar[k - 1] = b_new
            for i in range(k + 1, kmax + 1):
                t = mu[i][k]
                mu[i][k] = mu[i][k - 1] - m_ * t
                mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k]
            k = max(k - 1, 1)
    return b


def _integral_gso(b: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Exact Gram-Schmidt data: lam[i][j] = mu[i][j] * d[j+1] and
    d[i+1] = det of the leading i+1 Gram minor; all integers."""
    n = len(b)
    lam = [[0] * n for _ in range(n)]
    d = [1] * (n + 1)
    for i in range(n):
        for j in range(i + 1):
            u = _dot(b[i], b[j])
            for l in range(j):
                u = (d[l + 1] * u - lam[i][l] * lam[j][l]) // d[l]
            if j < i:
                lam[i][j] = u
            else:
                if u <= 0:
                    raise LatticeError("linearly dependent rows")
                d[i + 1] = u
    return lam, d


def is_lll_reduced(rows: Sequence[Sequence[int]], delta: float = 0.99) -> bool:
    """Exact check of size reduction and the Lovasz condition."""
    n = len(rows)
    if n <= 1:
        return True
    lam, d = _integral_gso(rows)
    for i in range(n):
        for j in range(i):
            if 2 * abs(lam[i][j]) > d[j + 1]:
                return False
    frac = Fraction(delta)
    num, den = frac.numerator, frac.denominator
    for k in range(1, n):
        # (delta - mu^2) B*_{k-1} <= B*_k, cleared of denominators
        if num * d[k] ** 2 - den * lam[k][k - 1] ** 2 > den * d[k + 1] * d[k - 1]:
            return False
    return True


def lll_reduce_rows(
    rows: Sequence[Sequence[int]], delta: float = 0.99, deep: bool = False
) -> list[list[int]]:
    """LLL-reduce integer rows. Output spans the same lattice and satisfies
    |mu_ij| <= 1/2 and the Lovasz condition with the given delta.

    Runs with float Gram-Schmidt coefficients first and falls back to exact
    rationals if the result fails the exact reducedness check. deep=True
    enables deep insertions (stronger reduction, same guarantees).
    """
    if not 0.25 < delta < 1:
        raise LatticeError(f"delta must be in (0.25, 1), got {delta}")
    work = [list(map(int, r)) for r in rows]
    try:
        reduced = _lll_core(work, delta, exact=False)
        if deep:
            # deep insertions converge quickly on an already-reduced basis
            reduced = _lll_core(reduced, delta, exact=False, deep=True)
        if is_lll_reduced(reduced, delta):
            return reduced
    except (_FloatInstability, OverflowError):
        pass
    return _lll_core([list(map(int, r)) for r in rows], delta, exact=True, deep=deep)


def lll_reduce(
    basis: LatticeBasis, delta: float = 0.99, deep: bool = False
) -> LatticeBasis:
    reduced = lll_reduce_rows(basis.rows, delta, deep)
    return LatticeBasis(
        tuple(tuple(r) for r in reduced),
        basis.modulus, basis.bound, basis.t_prime, basis.a_prime,
    )


def basis_determinant(rows: Sequence[Sequence[int]]) -> int:
    """Exact determinant via the integral Gram-Schmidt d-sequence (returns
    the absolute value; rows must be square and independent)."""
    _, d = _integral_gso(rows)
    det_sq = d[len(rows)]
    root = math.isqrt(det_sq)
    if root * root != det_sq:
        raise LatticeError("Gram determinant is not a perfect square")
    return root


# ---------------------------------------------------------------------------
# Enumeration with predicate
# ---------------------------------------------------------------------------

@dataclass
class SolverStats:
    reduction_seconds: float = 0.0
    nodes: int = 0


@dataclass
class SolverResult:
    vector: Row | None
    recovered_d: int | None
    predicate_passed: bool
    status: str  # "found", "exhausted" (search space done), "budget"
    stats: SolverStats
    diagnostics: dict = field(default_factory=dict)


def _float_gso(rows: Sequence[Sequence[int]]) -> tuple[list[list[float]], list[float]]:
    n = len(rows)
    mu = [[0.0] * n for _ in range(n)]
    bstar = [0.0] * n
    for i in range(n):
        for j in range(i):
            num = float(_dot(rows[i], rows[j]))
            for l in range(j):
                num -= mu[j][l] * mu[i][l] * bstar[l]
            mu[i][j] = num / bstar[j]
        val = float(_dot(rows[i], rows[i]))
        for j in range(i):
            val -= mu[i][j] * mu[i][j] * bstar[j]
        bstar[i] = val
    return mu, bstar


def _gso_projections(rows: Sequence[Row], vector: Sequence[float]) -> list[float]:
    """Coefficients of ``vector`` along the Gram-Schmidt directions of rows."""
    n = len(rows)
    mu, bstar = _float_gso(rows)
    # reconstruct b*_k lazily: b*_k = b_k - sum_j<k mu_kj b*_j
    dim = len(rows[0])
    bstar_vecs: list[list[float]] = []
    for k in range(n):
        vec = [float(v) for v in rows[k]]
        for j in range(k):
            m_ = mu[k][j]
            prev = bstar_vecs[j]
            for t in range(dim):
                vec[t] -= m_ * prev[t]
        bstar_vecs.append(vec)
    return [
        sum(h * b for h, b in zip(vector, bstar_vecs[k])) / bstar[k]
        for k in range(n)
    ]


def _enumerate(
    mu: list[list[float]],
    bstar: list[float],
    radius_sq: float,
    visit: Callable[[list[int]], object],
    budget: int,
    bias: Sequence[float] | None = None,
) -> tuple[object, int, bool]:
    """Depth-first enumeration of coefficient vectors whose lattice vector
    has squared norm <= radius_sq.

    Per level, the admissible coefficient interval follows from the partial
    norm; candidates are visited nearest-first around the level's center.
    Without bias the norm of the lattice vector itself is bounded (classic
    Schnorr-Euchner enumeration) and the top coefficient is restricted to
    >= 0, the caller testing negations. With bias (projections of a
    structural guess h onto the Gram-Schmidt directions), the bound applies
    to the distance from h instead: the search covers exactly the lattice
    points of the ball around h, nearest branches first.

    Returns (result, nodes, exhausted); result is the first non-None value
    from visit.
    """
    n = len(bstar)
    x = [0] * n
    center = [0.0] * n
    lo = [0] * n
    hi = [0] * n
    down = [0] * n
    up = [0] * n
    partial = [0.0] * (n + 1)  # partial[k+1]: contribution of levels > k
    nodes = 0

    def init_level(k: int) -> bool:
        c = -sum(x[j] * mu[j][k] for j in range(k + 1, n))
        if bias is not None:
            c += bias[k]
        center[k] = c
        room = radius_sq - partial[k + 1]
        if room < 0:
            return False
        half = (room / bstar[k]) ** 0.5
        lo_k = math.ceil(c - half)
        hi_k = math.floor(c + half)
        if bias is None and k == n - 1:
            lo_k = max(lo_k, 0)
        if lo_k > hi_k:
            return False
        s = min(max(round(c), lo_k), hi_k)
        x[k] = s
        lo[k], hi[k] = lo_k, hi_k
        down[k], up[k] = s - 1, s + 1
        return True

    def advance(k: int) -> bool:
        d_ok = down[k] >= lo[k]
        u_ok = up[k] <= hi[k]
        if d_ok and u_ok:
            if center[k] - down[k] < up[k] - center[k]:
                x[k] = down[k]
                down[k] -= 1
            else:
                x[k] = up[k]
                up[k] += 1
            return True
        if d_ok:
            x[k] = down[k]
            down[k] -= 1
            return True
        if u_ok:
            x[k] = up[k]
            up[k] += 1
            return True
        return False

    k = n - 1
    if not init_level(k):
        return None, 0, True

    def climb(k: int) -> int:
        # advance the current level or move up until one advances; n = done
        while not advance(k):
            k += 1
            if k == n:
                break
        return k

    while True:
        nodes += 1
        if nodes > budget:
            return None, nodes - 1, False
        diff = x[k] - center[k]
        partial[k] = partial[k + 1] + diff * diff * bstar[k]
        if k == 0:
            if any(x):
                result = visit(x)
                if result is not None:
                    return result, nodes, False
            k = climb(k)
        else:
            k -= 1
            if not init_level(k):
                k = climb(k + 1)
        if k == n:
            return None, nodes, True


def _matvec(x: Sequence[int], rows: Sequence[Row]) -> list[int]:
    dim = len(rows[0])
    out = [0] * dim
    for coeff, row in zip(x, rows):
        if coeff:
            for j in range(dim):
                out[j] += coeff * row[j]
    return out


class KeyPredicate:
    """Accepts a candidate target vector iff the key it implies matches Q.

    The last coordinate of a usable candidate is +-K (the bound row's
    contribution); after normalizing the sign so it is -K, coordinate m-1
    is kappa_0 and d = (kappa_0 + a_0) / t_0 mod n. On success the key is
    kept in ``recovered_d``. quick() is a cheap prefilter on the two
    structured coordinates, used by the solver before materializing full
    vectors.
    """

    def __init__(self, inst: HnpInstance, curve: CurveParams, q: Point) -> None:
        self.modulus = inst.modulus
        self.bound = inst.bound
        t0, a0 = inst.samples[0]
        self.a0 = a0
        self.t0_inv = inv_mod(t0, inst.modulus)
        self.curve = curve
        self.q = q
        self.recovered_d: int | None = None

    def quick(self, last: int, kappa0: int) -> bool:
        if last == -self.bound:
            k0 = kappa0
        elif last == self.bound:
            k0 = -kappa0
        else:
            return False
        return -self.bound <= k0 <= self.bound

    def __call__(self, vector: Sequence[int]) -> bool:
        bound = self.bound
        last = vector[-1]
        if last == -bound:
            vec = list(vector)
        elif last == bound:
            vec = [-v for v in vector]
        else:
            return False
        if any(abs(v) > bound for v in vec[:-1]):
            return False
        kappa0 = vec[-2]
        d = self.t0_inv * (kappa0 + self.a0) % self.modulus
        if d == 0:
            return False
        if scalar_mul(d, self.curve.g, self.curve) != self.q:
            return False
        self.recovered_d = d
        return True

    def structural_center(self, dim: int) -> list[float]:
        """Where a target of the expected shape sits: kappa coordinates
        centered in [0, K) and the bound coordinate at -K. Used to order
        enumeration, never to restrict it."""
        return [self.bound / 2.0] * (dim - 1) + [float(-self.bound)]


DEFAULT_ROUNDS = (0.55, 0.7, 0.85, 1.0)


def solve_with_predicate(
    basis: LatticeBasis,
    predicate: Callable[[Sequence[int]], bool],
    radius: float,
    node_budget: int = DEFAULT_NODE_BUDGET,
    delta: float = 0.99,
    rounds: Sequence[float] = DEFAULT_ROUNDS,
    deep: bool = True,
    structural_center: Sequence[float] | None = None,
) -> SolverResult:
    """LLL-reduce, test the reduced vectors, then enumerate vectors of norm
    at most radius, applying the predicate to each candidate and its
    negation.

    Without a structural center, enumeration proceeds in deterministic
    rounds of growing radius (fractions of ``radius``) so short solutions
    surface before the search commits to the full ball. With one (ambient
    coordinates of the target's expected shape), a single full-radius pass
    runs with visit order centered there instead. Exhaustion is a result,
    not an error.
    """
    if radius <= 0:
        raise LatticeError("radius must be positive")
    t0 = time.perf_counter()
    reduced = lll_reduce(basis, delta, deep)
    reduction_seconds = time.perf_counter() - t0
    stats = SolverStats(reduction_seconds=reduction_seconds, nodes=0)

    def accept(vec: Sequence[int]) -> Row | None:
        if predicate(vec):
            return tuple(vec)
        neg = [-v for v in vec]
        if predicate(neg):
            return tuple(neg)
        return None

    for row in reduced.rows:
        hit = accept(row)
        if hit is not None:
            return SolverResult(
                hit, getattr(predicate, "recovered_d", None), True, "found", stats
            )

    rows = reduced.rows
    mu, bstar = _float_gso(rows)
    quick = getattr(predicate, "quick", None)
    last_col = [row[-1] for row in rows]
    kappa_col = [row[-2] for row in rows] if len(rows[0]) >= 2 else None

    def visit(x: list[int]) -> Row | None:
        if quick is not None and kappa_col is not None:
            # quick() is orientation-symmetric, one call covers +-x
            last = sum(c * col for c, col in zip(x, last_col) if c)
            kappa0 = sum(c * col for c, col in zip(x, kappa_col) if c)
            if not quick(last, kappa0):
                return None
        return accept(_matvec(x, rows))

    remaining = node_budget
    if structural_center is not None:
        # Focus pass: every in-model target lies within the corner radius of
        # the structural box around the center, and its distance from the
        # center concentrates near sqrt(dim/12) * K, so the ball is swept in
        # deterministic rounds of growing radius. Falls through to the
        # norm-ball search if nothing passes.
        bias = _gso_projections(rows, structural_center)
        dim = len(rows)
        typical = math.sqrt((dim - 1) / 12) * basis.bound
        corner = math.sqrt(dim - 1) / 2 * basis.bound * 1.0000001
        focus_radii = [f * typical for f in (1.1, 1.3, 1.6)] + [corner]
        focus_radii = sorted(r for r in focus_radii if r <= corner) + [corner]
        for focus_radius in dict.fromkeys(focus_radii):
            result, nodes, _ = _enumerate(
                mu, bstar, focus_radius * focus_radius, visit, remaining, bias
            )
            stats.nodes += nodes
            remaining -= nodes
            if result is not None:
                return SolverResult(
                    result, getattr(predicate, "recovered_d", None), True,
                    "found", stats,
                )
            if remaining <= 0:
                return SolverResult(None, None, False, "budget", stats)

    fractions = sorted(set(min(f, 1.0) for f in rounds) | {1.0})
    for fraction in fractions:
        result, nodes, exhausted_round = _enumerate(
            mu, bstar, (fraction * radius) ** 2, visit, remaining
        )
        stats.nodes += nodes
        remaining -= nodes
        if result is not None:
            return SolverResult(
                result, getattr(predicate, "recovered_d", None), True, "found", stats
            )
        if remaining <= 0:
            return SolverResult(None, None, False, "budget", stats)
        if fraction >= 1.0 and exhausted_round:
            return SolverResult(None, None, False, "exhausted", stats)
    return SolverResult(None, None, False, "exhausted", stats)


def make_key_predicate(
    inst: HnpInstance, curve: CurveParams, q: Point
) -> KeyPredicate:
    return KeyPredicate(inst, curve, q)


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class AttackConfig:
    delta: float = 0.99
    radius_factor: float = 1.5
    node_budget: int = DEFAULT_NODE_BUDGET
    rounds: tuple[float, ...] = DEFAULT_ROUNDS
    deep: bool = True


def attack(
    samples: Sequence[LeakSample],
    curve: CurveParams,
    q: Point,
    config: AttackConfig | None = None,
) -> SolverResult:
    """build_instance -> build_lattice -> solve_with_predicate, with the
    Gaussian-heuristic diagnostics attached to the result. A ratio of
    expected target norm to gh above ~1.3 means enumeration is unlikely to
    reach the target within any reasonable budget; the diagnostics say so
    rather than the solver guessing."""
    if not samples:
        raise LatticeError("no samples")
    cfg = config or AttackConfig()
    inst = build_instance(samples, curve)
    basis = build_lattice(inst)
    gh = gaussian_heuristic(inst.m, inst.modulus, inst.bound)
    upper, expected = secret_norm_estimates(inst.m, inst.bound)
    predicate = make_key_predicate(inst, curve, q)
    result = solve_with_predicate(
        basis, predicate, cfg.radius_factor * expected,
        cfg.node_budget, cfg.delta, cfg.rounds, cfg.deep,
        structural_center=predicate.structural_center(basis.dim),
    )
    result.diagnostics.update(
        {
            "m": inst.m,
            "bound": inst.bound,
            "gaussian_heuristic": gh,
            "expected_norm": expected,
            "upper_norm": upper,
            "expected_over_gh": expected / gh,
        }
    )
    return result


# ---------------------------------------------------------------------------
# Instance and report files
# ---------------------------------------------------------------------------

def instance_to_json(inst: HnpInstance) -> str:
    return json.dumps(
        {
            "n": str(inst.modulus),
            "K": str(inst.bound),
            "samples": [{"t": str(t), "a": str(a)} for t, a in inst.samples],
        },
        indent=2,
    ) + "\n"


def instance_from_json(text: str) -> HnpInstance:
    obj = json.loads(text)
    return HnpInstance(
        int(obj["n"]),
        tuple((int(s["t"]), int(s["a"])) for s in obj["samples"]),
        int(obj["K"]),
    )


def save_instance(inst: HnpInstance, path: str | Path) -> None:
    Path(path).write_text(instance_to_json(inst), encoding="utf-8")


def load_instance(path: str | Path) -> HnpInstance:
    return instance_from_json(Path(path).read_text(encoding="utf-8"))


def result_report(result: SolverResult) -> dict:
    """JSON-ready solver report: outcome, key, diagnostics, and counters."""
    return {
        "status": result.status,
        "predicate_passed": result.predicate_passed,
        "recovered_d": str(result.recovered_d) if result.recovered_d else None,
        "nodes": result.stats.nodes,
        "reduction_seconds": result.stats.reduction_seconds,
        "diagnostics": {
            k: (str(v) if isinstance(v, int) and abs(v) > 2**53 else v)
            for k, v in result.diagnostics.items()
        },
    }
