"""Brute-force reference counter, written independently of the package.

This deliberately re-derives everything from the normative wire formats
using only the stdlib: base64 payload line, RSA verification by plain
pow(), byte-by-byte padding checks, bit-by-bit ballot decoding, and
first-occurrence deduplication by payload line. It shares no code with
blindvote.tally so the two can serve as oracles for each other.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass


@dataclass
class RefCount:
    party_votes: list[int]
    candidate_votes: list[list[int]]
    accepted: int
    rejected_indices: list[int]
    duplicate_indices: list[int]


def _check_payload(
    line: str,
    n: int,
    e: int,
    election_id: bytes,
    party_sizes: list[int],
) -> tuple[int, set[int]] | None:
    """Return (party, approvals) for a valid payload line, None otherwise."""
    k = (n.bit_length() + 7) // 8
    if not line.startswith("BPV1|"):
        return None
    body = line[len("BPV1|") :]
    if not body or "|" in body:
        return None
    try:
        raw = base64.urlsafe_b64decode(body + "=" * (-len(body) % 4))
    except Exception:
        return None
    if len(raw) != k:
        return None
    if base64.urlsafe_b64encode(raw).decode().rstrip("=") != body:
        return None
    s = int.from_bytes(raw, "big")
    if s >= n:
        return None
    m = pow(s, e, n)
    mb = m.to_bytes(k, "big")
    # padded structure: 00 | 56 | id(8) | ff... | 00 | block(32)
    if mb[0] != 0x00 or mb[1] != 0x56:
        return None
    if mb[2:10] != election_id:
        return None
    sep = k - 33
    if any(b != 0xFF for b in mb[10:sep]) or mb[sep] != 0x00:
        return None
    block = mb[sep + 1 :]
    if len(block) != 32 or block[0] != 0x01:
        return None
    if block[29] or block[30] or block[31]:
        return None
    party = block[9]
    if party >= len(party_sizes):
        return None
    approvals: set[int] = set()
    for i in range(152):
        if (block[10 + i // 8] >> (i % 8)) & 1:
            if i >= party_sizes[party]:
                return None
            approvals.add(i)
    return party, approvals


def reference_count(
    n: int,
    e: int,
    election_id: bytes,
    party_sizes: list[int],
    box: list[str],
) -> RefCount:
    party_votes = [0] * len(party_sizes)
    candidate_votes = [[0] * size for size in party_sizes]
    rejected: list[int] = []
    duplicates: list[int] = []
    seen: set[str] = set()
    accepted = 0
    for idx, line in enumerate(box):
        verdict = _check_payload(line, n, e, election_id, party_sizes)
        if verdict is None:
            rejected.append(idx)
            continue
        if line in seen:
            duplicates.append(idx)
            continue
        seen.add(line)
        accepted += 1
        party, approvals = verdict
        party_votes[party] += 1
        for i in approvals:
            candidate_votes[party][i] += 1
    return RefCount(
        party_votes=party_votes,
        candidate_votes=candidate_votes,
        accepted=accepted,
        rejected_indices=rejected,
        duplicate_indices=duplicates,
    )
