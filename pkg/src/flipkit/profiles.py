"""Bit-flip profile data model, (de)serialization, and synthetic generators.

A profile is a collection of individual bit-flip observations, each located by
(dimm, bank, row, byte offset, bit index) and carrying a flip polarity. Rows
are 8192 bytes (65536 bits) by default and span two 4096-byte pages.

Interchange formats:

* JSON-Lines (canonical): one record per line,
  ``{"dimm":"A3","bank":0,"row":17,"byte":4096,"bit":3,"dir":"0to1"}``.
  An optional first line ``{"meta":{"row_size":8192,"page_size":4096}}``
  carries geometry.
* CSV: header ``dimm,bank,row,byte,bit,dir`` with dir in {01, 10}. Non-default
  geometry is carried in a leading ``# row_size=... page_size=...`` comment so
  that round-trips preserve it.

Logs without per-flip direction cannot be imported as-is; re-emit them with a
declared fill-pattern assumption first.
"""

from __future__ import annotations

import enum
import json
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, TextIO


class FlipDirection(enum.Enum):
    ZERO_TO_ONE = "0to1"
    ONE_TO_ZERO = "1to0"


_CSV_DIR = {FlipDirection.ZERO_TO_ONE: "01", FlipDirection.ONE_TO_ZERO: "10"}
_CSV_DIR_REV = {v: k for k, v in _CSV_DIR.items()}

DEFAULT_ROW_SIZE = 8192
DEFAULT_PAGE_SIZE = 4096

_CSV_HEADER = "dimm,bank,row,byte,bit,dir"


class ProfileFormat(enum.Enum):
    JSONL = "jsonl"
    CSV = "csv"


class ProfileError(ValueError):
    """Invalid profile content (bad geometry, out-of-range field, duplicate)."""


class ProfileParseError(ProfileError):
    """Malformed input stream; message includes the 1-based line number."""


@dataclass(frozen=True, slots=True)
class FlipRecord:
    """One observed (or synthesized) bit flip."""

    dimm_id: str
    bank: int
    row: int
    byte_offset: int
    bit: int
    direction: FlipDirection

    def __post_init__(self) -> None:
        if self.bank < 0 or self.row < 0 or self.byte_offset < 0:
            raise ProfileError(f"negative location field in {self!r}")
        if not 0 <= self.bit < 8:
            raise ProfileError(f"bit must be in [0, 8), got {self.bit}")

    @property
    def cell(self) -> tuple[str, int, int, int, int]:
        """Full cell address; unique within a profile."""
        return (self.dimm_id, self.bank, self.row, self.byte_offset, self.bit)


@dataclass(frozen=True, slots=True)
class FlipProfile:
    """An immutable set of flip records plus the row/page geometry."""

    records: tuple[FlipRecord, ...]
    row_size_bytes: int = DEFAULT_ROW_SIZE
    page_size_bytes: int = DEFAULT_PAGE_SIZE
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.page_size_bytes <= 0 or self.row_size_bytes <= 0:
            raise ProfileError("geometry sizes must be positive")
        if self.row_size_bytes % self.page_size_bytes != 0:
            raise ProfileError(
                f"row_size_bytes={self.row_size_bytes} is not a multiple of "
                f"page_size_bytes={self.page_size_bytes}"
            )
        seen: set[tuple[str, int, int, int, int]] = set()
        for rec in self.records:
            if rec.byte_offset >= self.row_size_bytes:
                raise ProfileError(
                    f"byte_offset {rec.byte_offset} outside row of "
                    f"{self.row_size_bytes} bytes"
                )
            if rec.cell in seen:
                raise ProfileError(
                    f"duplicate flip at (row={rec.row}, byte={rec.byte_offset}, "
                    f"bit={rec.bit})"
                )
            seen.add(rec.cell)

    @property
    def row_bits(self) -> int:
        return self.row_size_bytes * 8

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True, slots=True)
class RowFlipSet:
    """All flips of one DRAM row, sorted by (byte_offset, bit)."""

    dimm_id: str
    bank: int
    row: int
    flips: tuple[tuple[int, int, FlipDirection], ...]

    @property
    def n_flips(self) -> int:
        return len(self.flips)

    def bit_positions(self) -> list[int]:
        """Flip positions as absolute bit indices within the row."""
        return [byte * 8 + bit for byte, bit, _ in self.flips]


@dataclass(frozen=True, slots=True)
class ByteFlipMask:
    """Per-byte flip mask; bit b of ``mask`` is set iff bit b flipped."""

    byte_offset: int
    mask: int
    directions: tuple[FlipDirection, ...] = field(default=())

    def __post_init__(self) -> None:
        if not 0 < self.mask < 256:
            raise ProfileError(f"mask must be a nonzero byte, got {self.mask}")
        if self.directions and len(self.directions) != self.mask.bit_count():
            raise ProfileError("one direction per set mask bit required")


def group_by_row(profile: FlipProfile) -> list[RowFlipSet]:
    """Partition records into per-row sets, keyed by (dimm, bank, row)."""
    groups: dict[tuple[str, int, int], list[FlipRecord]] = {}
    for rec in profile.records:
        groups.setdefault((rec.dimm_id, rec.bank, rec.row), []).append(rec)
    out = []
    for (dimm, bank, row), recs in sorted(groups.items()):
        flips = tuple(
            sorted((r.byte_offset, r.bit, r.direction) for r in recs)
        )
        out.append(RowFlipSet(dimm, bank, row, flips))
    return out


def byte_masks(row_set: RowFlipSet) -> list[ByteFlipMask]:
    """Collapse a row's flips into one 8-bit mask per affected byte."""
    by_byte: dict[int, list[tuple[int, FlipDirection]]] = {}
    for byte, bit, direction in row_set.flips:
        by_byte.setdefault(byte, []).append((bit, direction))
    masks = []
    for byte, bits in sorted(by_byte.items()):
        bits.sort()
        mask = 0
        for bit, _ in bits:
            mask |= 1 << bit
        masks.append(ByteFlipMask(byte, mask, tuple(d for _, d in bits)))
    return masks


# ---------------------------------------------------------------------------
# Parsing and writing
# ---------------------------------------------------------------------------

def _record_from_fields(
    lineno: int, dimm: str, bank: str, row: str, byte: str, bit: str, dir_token: str,
    dir_map: dict[str, FlipDirection],
) -> FlipRecord:
    try:
        bank_i, row_i, byte_i, bit_i = int(bank), int(row), int(byte), int(bit)
    except ValueError as exc:
        raise ProfileParseError(f"line {lineno}: non-integer field ({exc})") from None
    if dir_token not in dir_map:
        raise ProfileParseError(
            f"line {lineno}: unknown direction {dir_token!r} "
            f"(expected one of {sorted(dir_map)})"
        )
    if not 0 <= bit_i < 8:
        raise ProfileParseError(f"line {lineno}: field 'bit' out of range: {bit_i}")
    if bank_i < 0 or row_i < 0 or byte_i < 0:
        raise ProfileParseError(f"line {lineno}: negative location field")
    return FlipRecord(dimm, bank_i, row_i, byte_i, bit_i, dir_map[dir_token])


def _iter_lines(stream: str | TextIO) -> Iterable[str]:
    if isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
    for line in text.splitlines():
        yield line


def parse_profile(stream: str | TextIO, fmt: ProfileFormat) -> FlipProfile:
    """Parse a JSONL or CSV flip log into a profile.

    Raises ProfileParseError with a line number on malformed input, and
    ProfileError on out-of-range fields or duplicate cells.
    """
    row_size = DEFAULT_ROW_SIZE
    page_size = DEFAULT_PAGE_SIZE
    provenance = ""
    records: list[FlipRecord] = []

    if fmt is ProfileFormat.JSONL:
        dir_map = {d.value: d for d in FlipDirection}
        for lineno, line in enumerate(_iter_lines(stream), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProfileParseError(f"line {lineno}: bad JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise ProfileParseError(f"line {lineno}: expected an object")
            if "meta" in obj:
                meta = obj["meta"]
                row_size = int(meta.get("row_size", row_size))
                page_size = int(meta.get("page_size", page_size))
                provenance = str(meta.get("provenance", provenance))
                continue
            missing = {"dimm", "bank", "row", "byte", "bit", "dir"} - obj.keys()
            if missing:
                raise ProfileParseError(
                    f"line {lineno}: missing fields {sorted(missing)}"
                )
            records.append(
                _record_from_fields(
                    lineno, str(obj["dimm"]), str(obj["bank"]), str(obj["row"]),
                    str(obj["byte"]), str(obj["bit"]), str(obj["dir"]), dir_map,
                )
            )
    elif fmt is ProfileFormat.CSV:
        header_seen = False
        for lineno, line in enumerate(_iter_lines(stream), start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                for token in stripped.lstrip("#").split():
                    key, _, value = token.partition("=")
                    if key == "row_size":
                        row_size = int(value)
                    elif key == "page_size":
                        page_size = int(value)
                continue
            if not header_seen:
                if stripped != _CSV_HEADER:
                    raise ProfileParseError(
                        f"line {lineno}: expected header {_CSV_HEADER!r}"
                    )
                header_seen = True
                continue
            fields = stripped.split(",")
            if len(fields) != 6:
                raise ProfileParseError(
                    f"line {lineno}: expected 6 fields, got {len(fields)}"
                )
            records.append(_record_from_fields(lineno, *fields, _CSV_DIR_REV))
    else:
        raise ValueError(f"unknown format {fmt!r}")

    return FlipProfile(tuple(records), row_size, page_size, provenance)


def write_profile(profile: FlipProfile, fmt: ProfileFormat) -> str:
    """Serialize a profile; parse_profile(write_profile(p), fmt) == p."""
    lines: list[str] = []
    if fmt is ProfileFormat.JSONL:
        meta: dict[str, object] = {
            "row_size": profile.row_size_bytes,
            "page_size": profile.page_size_bytes,
        }
        if profile.provenance:
            meta["provenance"] = profile.provenance
        lines.append(json.dumps({"meta": meta}, separators=(",", ":")))
        for rec in profile.records:
            lines.append(
                json.dumps(
                    {
                        "dimm": rec.dimm_id,
                        "bank": rec.bank,
                        "row": rec.row,
                        "byte": rec.byte_offset,
                        "bit": rec.bit,
                        "dir": rec.direction.value,
                    },
                    separators=(",", ":"),
                )
            )
    elif fmt is ProfileFormat.CSV:
        if (
            profile.row_size_bytes != DEFAULT_ROW_SIZE
            or profile.page_size_bytes != DEFAULT_PAGE_SIZE
        ):
            lines.append(
                f"# row_size={profile.row_size_bytes} "
                f"page_size={profile.page_size_bytes}"
            )
        lines.append(_CSV_HEADER)
        for rec in profile.records:
            lines.append(
                f"{rec.dimm_id},{rec.bank},{rec.row},{rec.byte_offset},"
                f"{rec.bit},{_CSV_DIR[rec.direction]}"
            )
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------

def _uniform_direction(rng: random.Random) -> FlipDirection:
    return FlipDirection.ZERO_TO_ONE if rng.random() < 0.5 else FlipDirection.ONE_TO_ZERO


def synth_uniform(
    rows: int,
    flips_per_row: int,
    seed: int,
    row_size_bytes: int = DEFAULT_ROW_SIZE,
    page_size_bytes: int = DEFAULT_PAGE_SIZE,
    dimm_id: str = "synth",
) -> FlipProfile:
    """Null-model generator: per row, flip positions drawn uniformly without
    replacement, directions uniform. Deterministic for a given seed."""
    row_bits = row_size_bytes * 8
    if flips_per_row > row_bits:
        raise ProfileError(
            f"flips_per_row={flips_per_row} exceeds row capacity of {row_bits} bits"
        )
    rng = random.Random(f"uniform:{seed}")
    records: list[FlipRecord] = []
    for row in range(rows):
        for pos in rng.sample(range(row_bits), flips_per_row):
            records.append(
                FlipRecord(dimm_id, 0, row, pos // 8, pos % 8, _uniform_direction(rng))
            )
    return FlipProfile(
        tuple(records), row_size_bytes, page_size_bytes,
        provenance=f"synth_uniform(rows={rows}, flips={flips_per_row}, seed={seed})",
    )


def synth_clustered(
    rows: int,
    clusters_per_row: int,
    flips_per_cluster: int,
    spread_bits: float,
    seed: int,
    row_size_bytes: int = DEFAULT_ROW_SIZE,
    page_size_bytes: int = DEFAULT_PAGE_SIZE,
    dimm_id: str = "synth",
) -> FlipProfile:
    """Clustered generator: uniform cluster centers, flips placed at the
    center plus a rounded zero-mean Gaussian displacement of scale
    spread_bits, clamped to the row; colliding positions are re-drawn."""
    if rows <= 0 or clusters_per_row <= 0 or flips_per_cluster <= 0 or spread_bits <= 0:
        raise ProfileError("all clustered-generator arguments must be positive")
    row_bits = row_size_bytes * 8
    if clusters_per_row * flips_per_cluster > row_bits:
        raise ProfileError("expected flips exceed row capacity")
    rng = random.Random(f"clustered:{seed}")
    records: list[FlipRecord] = []
    for row in range(rows):
        taken: set[int] = set()
        for _ in range(clusters_per_row):
            center = rng.randrange(row_bits)
            for _ in range(flips_per_cluster):
                while True:
                    offset = round(rng.gauss(0.0, spread_bits))
                    pos = min(max(center + offset, 0), row_bits - 1)
                    if pos not in taken:
                        taken.add(pos)
                        break
                records.append(
                    FlipRecord(
                        dimm_id, 0, row, pos // 8, pos % 8, _uniform_direction(rng)
                    )
                )
    return FlipProfile(
        tuple(records), row_size_bytes, page_size_bytes,
        provenance=(
            f"synth_clustered(rows={rows}, clusters={clusters_per_row}, "
            f"flips={flips_per_cluster}, spread={spread_bits}, seed={seed})"
        ),
    )


def with_records(profile: FlipProfile, records: Iterable[FlipRecord]) -> FlipProfile:
    """Copy of the profile with a different record set, same geometry."""
    return replace(profile, records=tuple(records))
