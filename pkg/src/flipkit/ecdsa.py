"""Short-Weierstrass elliptic curve arithmetic and ECDSA with an injectable
nonce, over arbitrary prime fields.

Points are affine (x, y) tuples; the identity is None. The nonce is always a
caller-supplied argument so fault experiments control it exactly, and the
message hash z arrives already reduced mod the group order.

A registry of small prime-order curves (16 to 64 bit orders) supports
desk-scale lattice experiments; each was produced by
``find_prime_order_curve(bits, seed)`` with the seed recorded below, so the
entries can be regenerated and checked.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

Point = tuple[int, int] | None


class CurveError(ValueError):
    """Invalid curve parameters or off-curve point."""


class DegenerateSignature(ValueError):
    """r or s reduced to zero; the caller should retry with a fresh nonce."""


def inv_mod(a: int, m: int) -> int:
    return pow(a, -1, m)


@dataclass(frozen=True, slots=True)
class CurveParams:
    """y^2 = x^3 + ax + b over GF(p), base point (gx, gy) of prime order n."""

    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    h: int = 1

    def __post_init__(self) -> None:
        if (4 * self.a**3 + 27 * self.b**2) % self.p == 0:
            raise CurveError("singular curve: 4a^3 + 27b^2 = 0 mod p")
        if not is_on_curve((self.gx, self.gy), self):
            raise CurveError("base point not on curve")
        if scalar_mul(self.n, self.g, self) is not None:
            raise CurveError("n is not the order of the base point")

    @property
    def g(self) -> Point:
        return (self.gx, self.gy)


def is_on_curve(point: Point, curve: CurveParams) -> bool:
    if point is None:
        return True
    x, y = point
    return (y * y - (x * x * x + curve.a * x + curve.b)) % curve.p == 0


def _require_on_curve(point: Point, curve: CurveParams) -> None:
    if not is_on_curve(point, curve):
        raise CurveError(f"point {point} not on curve")


def _add(p1: Point, p2: Point, curve: CurveParams) -> Point:
    # Group law without the on-curve check; used by hot loops.
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    p = curve.p
    x1, y1 = p1
    x2, y2 = p2
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + curve.a) * inv_mod(2 * y1, p) % p
    else:
        lam = (y2 - y1) * inv_mod(x2 - x1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def point_add(p1: Point, p2: Point, curve: CurveParams) -> Point:
    """Group sum, covering identity, doubling, and inverse cases."""
    _require_on_curve(p1, curve)
    _require_on_curve(p2, curve)
    return _add(p1, p2, curve)


def point_neg(point: Point, curve: CurveParams) -> Point:
    if point is None:
        return None
    x, y = point
    return (x, (-y) % curve.p)


def scalar_mul(k: int, point: Point, curve: CurveParams) -> Point:
    """k-fold group sum via double-and-add; scalar_mul(0, P) is the identity."""
    _require_on_curve(point, curve)
    if k < 0:
        return scalar_mul(-k, point_neg(point, curve), curve)
    result: Point = None
    addend = point
    while k:
        if k & 1:
            result = _add(result, addend, curve)
        addend = _add(addend, addend, curve)
        k >>= 1
    return result


@dataclass(frozen=True, slots=True)
class KeyPair:
    d: int
    q: Point

    @classmethod
    def generate(cls, curve: CurveParams, rng: random.Random) -> "KeyPair":
        d = rng.randrange(1, curve.n)
        return cls(d, scalar_mul(d, curve.g, curve))


@dataclass(frozen=True, slots=True)
class Signature:
    r: int
    s: int
    z: int


def ecdsa_sign(z: int, d: int, k: int, curve: CurveParams) -> Signature:
    """Sign with the explicit nonce k: s = k^-1 (z + r d) mod n.

    Raises DegenerateSignature when r or s reduces to zero (retry with a
    different nonce) and ValueError for a nonce outside [1, n).
    """
    n = curve.n
    if not 1 <= k < n:
        raise ValueError(f"nonce must be in [1, {n}), got {k}")
    point = scalar_mul(k, curve.g, curve)
    assert point is not None
    r = point[0] % n
    if r == 0:
        raise DegenerateSignature("r = 0")
    s = inv_mod(k, n) * (z + r * d) % n
    if s == 0:
        raise DegenerateSignature("s = 0")
    return Signature(r, s, z % n)


def ecdsa_verify(sig: Signature, q: Point, curve: CurveParams) -> bool:
    """True iff x(u1 G + u2 Q) = r mod n with u1 = z/s, u2 = r/s."""
    _require_on_curve(q, curve)
    n = curve.n
    if sig.s % n == 0:
        raise ValueError("signature with s = 0")
    if not (1 <= sig.r < n):
        return False
    w = inv_mod(sig.s, n)
    u1 = sig.z * w % n
    u2 = sig.r * w % n
    point = _add(
        scalar_mul(u1, curve.g, curve), scalar_mul(u2, q, curve), curve
    )
    if point is None:
        return False
    return point[0] % n == sig.r


def recover_nonce_point(sig: Signature, q: Point, curve: CurveParams) -> Point:
    """The point k'G implied by a signature, where k' is whatever nonce was
    actually inverted to produce s: (z/s) G + (r/s) Q.

    For an honest signature this is kG; for one whose s was computed with a
    corrupted nonce it is the corrupted nonce times G, which is what makes
    fault decoding possible.
    """
    _require_on_curve(q, curve)
    n = curve.n
    if sig.s % n == 0:
        raise ValueError("cannot recover nonce point: s = 0")
    w = inv_mod(sig.s, n)
    return _add(
        scalar_mul(sig.z * w % n, curve.g, curve),
        scalar_mul(sig.r * w % n, q, curve),
        curve,
    )


# ---------------------------------------------------------------------------
# Primality / factoring helpers for the curve search
# ---------------------------------------------------------------------------

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Miller-Rabin; deterministic for n < 3.3e24 with the fixed witnesses."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        x = rng.randrange(2, n)
        y = x
        c = rng.randrange(1, n)
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = __import__("math").gcd(abs(x - y), n)
        if d != n:
            return d


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division plus Pollard rho."""
    rng = random.Random(0xFAC7)
    factors: dict[int, int] = {}
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        while n % p == 0:
            factors[p] = factors.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            factors[m] = factors.get(m, 0) + 1
            continue
        d = _pollard_rho(m, rng)
        stack.extend((d, m // d))
    return factors


# ---------------------------------------------------------------------------
# Prime-order toy curve search
# ---------------------------------------------------------------------------

def _point_order_in_interval(
    point: Point, curve: CurveParams | "_RawCurve", lo: int, hi: int
) -> int | None:
    """Smallest multiple m in [lo, hi] with m*point = identity, via BSGS,
    reduced to the exact order of the point. None if no multiple exists."""
    width = hi - lo + 1
    step = int(width**0.5) + 1
    # Baby steps: j * P for j in [0, step).
    baby: dict[Point, int] = {}
    pj: Point = None
    for j in range(step):
        baby.setdefault(pj, j)
        pj = _add(pj, point, curve)  # type: ignore[arg-type]
    step_point = pj  # step * P
    base = _scalar_mul_raw(lo, point, curve)
    m = None
    giant = base
    for i in range(step + 1):
        # giant = (lo + i*step) * P; want giant + j*P = O, i.e. -giant in baby.
        neg = None if giant is None else (giant[0], (-giant[1]) % curve.p)
        if neg in baby:
            m = lo + i * step + baby[neg]
            if lo <= m <= hi:
                break
            m = None
        giant = _add(giant, step_point, curve)  # type: ignore[arg-type]
    if m is None:
        return None
    # Reduce the multiple to the exact point order.
    for prime in factorize(m):
        while m % prime == 0 and _scalar_mul_raw(m // prime, point, curve) is None:
            m //= prime
    return m


class _RawCurve:
    """Curve parameters before validation, for use during the search."""

    __slots__ = ("p", "a", "b")

    def __init__(self, p: int, a: int, b: int) -> None:
        self.p, self.a, self.b = p, a, b


def _scalar_mul_raw(k: int, point: Point, curve) -> Point:
    result: Point = None
    addend = point
    while k:
        if k & 1:
            result = _add(result, addend, curve)
        addend = _add(addend, addend, curve)
        k >>= 1
    return result


def find_prime_order_curve(
    bits: int, seed: int = 0, min_p_fraction: float = 0.94
) -> CurveParams:
    """Search for a curve over a random ~bits-bit prime field whose group
    order is prime, returning it with a random base point.

    Uses baby-step giant-step over the Hasse interval to find the order of a
    random point; a point whose order exceeds the interval width pins the
    group order uniquely. Deterministic for a given (bits, seed).

    min_p_fraction places p (hence the order, by Hasse) in the top of the
    bits-bit range, so orders start with several 1 bits like standardized
    curve orders do; nonce-fault experiments on the top bit positions need
    that headroom.
    """
    if bits < 8:
        raise ValueError("need at least 8 bits")
    if not 0.5 <= min_p_fraction < 1.0:
        raise ValueError("min_p_fraction must be in [0.5, 1)")
    rng = random.Random(f"curvesearch:{bits}:{seed}")
    while True:
        p = rng.randrange(int(min_p_fraction * (1 << bits)), 1 << bits) | 1
        while p % 4 != 3 or not is_prime(p):
            p += 2
        sqrt_p = int(p**0.5)
        lo, hi = p + 1 - 2 * sqrt_p - 2, p + 1 + 2 * sqrt_p + 2
        for _ in range(40):
            a = rng.randrange(p)
            b = rng.randrange(p)
            if (4 * a**3 + 27 * b**2) % p == 0:
                continue
            raw = _RawCurve(p, a, b)
            # Random point: x with x^3 + ax + b a quadratic residue.
            point = None
            for _ in range(64):
                x = rng.randrange(p)
                t = (x * x * x + a * x + b) % p
                if t == 0:
                    continue
                if pow(t, (p - 1) // 2, p) != 1:
                    continue
                y = pow(t, (p + 1) // 4, p)  # p = 3 mod 4
                point = (x, y)
                break
            if point is None:
                continue
            order = _point_order_in_interval(point, raw, lo, hi)
            if order is None or order <= 4 * sqrt_p + 4:
                continue
            # Unique multiple of the point order in the Hasse interval.
            k0 = (lo + order - 1) // order
            if k0 * order > hi:
                continue
            group_order = k0 * order
            if group_order != order or not is_prime(group_order):
                continue
            return CurveParams(p, a, b, point[0], point[1], group_order, 1)


# Registry entries generated by find_prime_order_curve(bits, seed=1), with
# min_p_fraction=0.995 for toy48 (nonce-fault experiments run there and want
# the order as close to 2^48 as standardized orders are to their power of
# two). See the regeneration test for the 16- and 24-bit entries.
TOY_CURVES: dict[str, CurveParams] = {}


def _register(name: str, p: int, a: int, b: int, gx: int, gy: int, n: int) -> None:
    TOY_CURVES[name] = CurveParams(p, a, b, gx, gy, n, 1)


_TOY_CONSTANTS: list[tuple[str, int, int, int, int, int, int]] = [
    ("toy16", 65479, 52719, 4132, 19858, 11942, 65609),
    ("toy24", 16245571, 3726186, 10581030, 4579760, 10529890, 16240681),
    ("toy32", 4184293363, 2456520381, 3204431287, 3107931337, 3017424850, 4184193983),
    ("toy48", 280463847649327, 29730751265930, 267600774616908, 253843925461038,
     250445756392623, 280463872940683),
    ("toy64", 17993674395824411563, 15400758152896082894, 8689898663277601161,
     14077147230913361836, 8521771716061577239, 17993674392290313221),
]

for _entry in _TOY_CONSTANTS:
    _register(*_entry)


def get_curve(name: str) -> CurveParams:
    try:
        return TOY_CURVES[name]
    except KeyError:
        raise KeyError(
            f"unknown curve {name!r}; available: {sorted(TOY_CURVES)}"
        ) from None


# ---------------------------------------------------------------------------
# Curve config files: JSON {p, a, b, gx, gy, n, h}, decimal or 0x-hex strings
# ---------------------------------------------------------------------------

def _parse_int(value: int | str) -> int:
    if isinstance(value, int):
        return value
    text = value.strip()
    return int(text, 16) if text.lower().startswith("0x") else int(text, 10)


def curve_from_dict(obj: dict) -> CurveParams:
    missing = {"p", "a", "b", "gx", "gy", "n"} - obj.keys()
    if missing:
        raise CurveError(f"curve config missing fields {sorted(missing)}")
    return CurveParams(
        p=_parse_int(obj["p"]),
        a=_parse_int(obj["a"]),
        b=_parse_int(obj["b"]),
        gx=_parse_int(obj["gx"]),
        gy=_parse_int(obj["gy"]),
        n=_parse_int(obj["n"]),
        h=_parse_int(obj.get("h", 1)),
    )


def curve_to_dict(curve: CurveParams) -> dict[str, str]:
    return {
        "p": str(curve.p),
        "a": str(curve.a),
        "b": str(curve.b),
        "gx": str(curve.gx),
        "gy": str(curve.gy),
        "n": str(curve.n),
        "h": str(curve.h),
    }


def load_curve(path: str | Path) -> CurveParams:
    with open(path, "r", encoding="utf-8") as fh:
        return curve_from_dict(json.load(fh))


def save_curve(curve: CurveParams, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(curve_to_dict(curve), fh, indent=2)
        fh.write("\n")


def resolve_curve(name_or_path: str) -> CurveParams:
    """Accept either a registry name (toy48) or a JSON config file path."""
    if name_or_path in TOY_CURVES:
        return TOY_CURVES[name_or_path]
    if Path(name_or_path).exists():
        return load_curve(name_or_path)
    raise CurveError(
        f"{name_or_path!r} is neither a registered curve nor a readable file"
    )
