"""Nonce fault injection for ECDSA and decoding of the induced error.

The fault model: a contiguous run of L bits starting at position i is XORed
into the nonce after r = x(kG) has been computed but before s, so r belongs
to the true nonce k while s was computed with kbar = k ^ mask. The additive
error is then

    delta_k = kbar - k = ((2^L - 1) - 2v) * 2^i

where v holds the original bit values of the run. A decoded and confirmed
delta therefore reveals the run's bits in kbar (they are the flipped
values), and runs at the top of the order's bit range convert into bounded
hidden-number-problem samples.

Confirmation works through the recovered nonce point: R' = (z/s)G + (r/s)Q
equals kbar*G, so a candidate delta is correct iff x(R' - delta*G) = r mod n.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from typing import Iterable, NamedTuple

from .ecdsa import (
    CurveParams,
    DegenerateSignature,
    Point,
    Signature,
    _add,
    ecdsa_sign,
    inv_mod,
    point_neg,
    recover_nonce_point,
    scalar_mul,
)


class FaultError(ValueError):
    pass


class FaultRangeError(FaultError):
    """The fault carries the nonce outside [1, n); rejected in simulation."""


class NoConfirmedDelta(FaultError):
    """No candidate delta passed the point check; fault outside the model."""


class AmbiguousDelta(FaultError):
    """More than one distinct delta value passed the point check."""

    def __init__(self, deltas: list[int]) -> None:
        super().__init__(f"ambiguous fault: deltas {deltas} all confirm")
        self.deltas = deltas


@dataclass(frozen=True, slots=True)
class FaultMask:
    """Contiguous XOR mask of ``length`` bits starting at bit ``position``."""

    position: int
    length: int

    def __post_init__(self) -> None:
        if self.position < 0 or self.length < 1:
            raise FaultError(
                f"need position >= 0 and length >= 1, got {self!r}"
            )

    @property
    def mask(self) -> int:
        return ((1 << self.length) - 1) << self.position


@dataclass(frozen=True, slots=True)
class FaultySignature:
    """r from the true nonce, s_bar from the corrupted one."""

    r: int
    s_bar: int
    z: int


class FaultCandidate(NamedTuple):
    position: int
    length: int
    original_bits: int  # values of the run in the pre-fault nonce


@dataclass(frozen=True, slots=True)
class DecodedFault:
    delta_k: int
    candidates: tuple[FaultCandidate, ...]  # ascending run length
    confirmed: bool


class LeakPolicy(enum.Enum):
    MIN_RUN_LENGTH = "min-run-length"
    GROUND_TRUTH = "ground-truth"


class KnownBits(NamedTuple):
    position: int
    length: int
    value: int  # bits of kbar at [position, position + length)


@dataclass(frozen=True, slots=True)
class LeakSample:
    """One relation kbar + a = t*d (mod n) with partial knowledge of kbar.

    After recentering, the same relation holds for the reduced nonce
    kappa = kbar - w * 2^(lambda - ell) with 0 <= kappa < bound.
    """

    t: int
    a: int
    known_bits: KnownBits
    bound: int


def sign_with_fault(
    z: int, d: int, k: int, fault: FaultMask, curve: CurveParams
) -> FaultySignature:
    """Sign with nonce k, then recompute s with k ^ fault.mask.

    Raises FaultRangeError when the corrupted nonce leaves [1, n) and
    DegenerateSignature when r or s_bar is zero.
    """
    n = curve.n
    if fault.position + fault.length > n.bit_length():
        raise FaultError(
            f"fault {fault} exceeds the {n.bit_length()}-bit order"
        )
    kbar = k ^ fault.mask
    if not 1 <= kbar < n:
        raise FaultRangeError(
            f"faulted nonce {kbar} outside [1, {n})"
        )
    honest = ecdsa_sign(z, d, k, curve)
    if fault.mask == 0:
        return FaultySignature(honest.r, honest.s, honest.z)
    s_bar = inv_mod(kbar, n) * (z + honest.r * d) % n
    if s_bar == 0:
        raise DegenerateSignature("s_bar = 0")
    return FaultySignature(honest.r, s_bar, z % n)


def _decompositions(
    delta: int, max_run_length: int, max_position: int, order_bits: int
) -> list[FaultCandidate]:
    """All (i, L, v) with ((2^L - 1) - 2v) * 2^i = delta inside the bounds.

    The odd part of delta fixes i and, per run length L, the original bits v;
    candidates are ordered by ascending L.
    """
    i = (delta & -delta).bit_length() - 1 if delta else 0
    c = delta >> i  # odd, signed
    out = []
    min_length = abs(c).bit_length()
    for length in range(min_length, max_run_length + 1):
        v2 = (1 << length) - 1 - c
        if v2 % 2 or not 0 <= v2 // 2 < (1 << length):
            continue
        if i + length > order_bits or i > max_position:
            continue
        out.append(FaultCandidate(i, length, v2 // 2))
    return out


def decode_delta(
    fsig: FaultySignature,
    q: Point,
    curve: CurveParams,
    max_run_length: int = 4,
    max_position: int | None = None,
) -> DecodedFault:
    """Recover the additive nonce error from a faulty signature.

    Checks every delta = c * 2^i with odd |c| < 2^max_run_length against
    x(R' - delta*G) = r mod n, where R' is the recovered nonce point. Exactly
    one delta value must confirm; its full candidate list is returned.
    """
    n = curve.n
    order_bits = n.bit_length()
    if max_position is None:
        max_position = order_bits - 1
    if max_run_length < 1 or max_position >= order_bits:
        raise FaultError("bad decode bounds")

    sig = Signature(fsig.r, fsig.s_bar, fsig.z)
    r_point = recover_nonce_point(sig, q, curve)
    r_target = fsig.r % n

    def x_matches(point: Point) -> bool:
        return point is not None and point[0] % n == r_target

    confirmed: list[int] = []
    g_i = curve.g  # 2^i * G
    for i in range(max_position + 1):
        if i + 1 > order_bits:
            break
        g_2i = _add(g_i, g_i, curve)
        multiple = g_i  # c * 2^i * G for odd c
        c = 1
        while c < (1 << max_run_length):
            if i + c.bit_length() <= order_bits:
                # delta = +c * 2^i  =>  check R' - delta*G
                if x_matches(_add(r_point, point_neg(multiple, curve), curve)):
                    confirmed.append(c << i)
                # delta = -c * 2^i
                if x_matches(_add(r_point, multiple, curve)):
                    confirmed.append(-(c << i))
            c += 2
            if c < (1 << max_run_length):
                multiple = _add(multiple, g_2i, curve)
        g_i = g_2i

    distinct = sorted(set(confirmed))
    if not distinct:
        raise NoConfirmedDelta("no candidate delta confirmed")
    if len(distinct) > 1:
        raise AmbiguousDelta(distinct)
    delta = distinct[0]
    candidates = _decompositions(delta, max_run_length, max_position, order_bits)
    if not candidates:
        raise NoConfirmedDelta(
            f"delta {delta} confirmed but admits no in-bounds decomposition"
        )
    return DecodedFault(delta, tuple(candidates), True)


def leak_from_decode(
    fsig: FaultySignature,
    decoded: DecodedFault,
    policy: LeakPolicy,
    curve: CurveParams,
    injected: FaultMask | None = None,
) -> LeakSample | None:
    """Convert a confirmed decode into an HNP relation on kbar, or None when
    the policy cannot pick a candidate.

    MIN_RUN_LENGTH takes the shortest run (shorter runs are far more
    frequent in practice); GROUND_TRUTH selects the candidate matching the
    injected mask and is only meaningful in simulation.
    """
    if not decoded.confirmed:
        raise FaultError("leak requires a confirmed decode")
    if policy is LeakPolicy.MIN_RUN_LENGTH:
        chosen = decoded.candidates[0]
    elif policy is LeakPolicy.GROUND_TRUTH:
        if injected is None:
            raise FaultError("ground-truth policy needs the injected mask")
        matches = [
            c for c in decoded.candidates
            if (c.position, c.length) == (injected.position, injected.length)
        ]
        if not matches:
            return None
        chosen = matches[0]
    else:
        raise FaultError(f"unknown policy {policy!r}")

    n = curve.n
    s_inv = inv_mod(fsig.s_bar, n)
    flipped = chosen.original_bits ^ ((1 << chosen.length) - 1)
    return LeakSample(
        t=s_inv * fsig.r % n,
        a=-s_inv * fsig.z % n,
        known_bits=KnownBits(chosen.position, chosen.length, flipped),
        bound=n,
    )


def filter_and_recenter(
    samples: Iterable[LeakSample], curve: CurveParams
) -> list[LeakSample]:
    """Keep samples whose known bits occupy the top of the order's bit range
    and rewrite them so the unknown part is bounded by 2^(lambda - ell).

    With kbar = kappa + w * 2^(lambda - ell) and kbar + a = t*d, the shifted
    sample kappa + (a + w * 2^(lambda - ell)) = t*d has 0 <= kappa < bound.
    """
    order_bits = curve.n.bit_length()
    out = []
    for sample in samples:
        kb = sample.known_bits
        if kb.position + kb.length != order_bits:
            continue
        bound = 1 << kb.position
        shifted_a = (sample.a + kb.value * bound) % curve.n
        out.append(replace(sample, a=shifted_a, bound=bound))
    return out


# ---------------------------------------------------------------------------
# Batch file formats: faulty signatures and decoded faults as JSONL
# ---------------------------------------------------------------------------

def faulty_signatures_to_jsonl(batch: Iterable[FaultySignature]) -> str:
    lines = [
        json.dumps({"z": str(f.z), "r": str(f.r), "s_bar": str(f.s_bar)},
                   separators=(",", ":"))
        for f in batch
    ]
    return "\n".join(lines) + ("\n" if lines else "")

def faulty_signatures_from_jsonl(text: str) -> list[FaultySignature]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            out.append(
                FaultySignature(int(obj["r"]), int(obj["s_bar"]), int(obj["z"]))
            )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise FaultError(f"line {lineno}: bad batch record ({exc})") from None
    return out


def decoded_to_jsonl(decodes: Iterable[DecodedFault]) -> str:
    lines = []
    for d in decodes:
        lines.append(
            json.dumps(
                {
                    "delta_k": str(d.delta_k),
                    "candidates": [
                        {"i": c.position, "L": c.length, "v": c.original_bits}
                        for c in d.candidates
                    ],
                    "confirmed": d.confirmed,
                },
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")
