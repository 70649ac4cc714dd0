"""Election universe: parties, candidates, identifiers, and selection checks.

The configuration bounds are wire-format bounds: one byte encodes the party
choice (at most 255 parties) and the candidate approval bitmask is 19 bytes
(at most 152 candidates per party). See `codec` for the ballot layout that
fixes these numbers.
"""

from __future__ import annotations

import datetime
import io
import os
from dataclasses import dataclass, field
from typing import TextIO, Union

from .errors import (
    CandidateOutOfRange,
    InvariantViolation,
    ParseError,
    PartyOutOfRange,
)

ELECTION_ID_LEN = 8
MAX_PARTIES = 255
MAX_CANDIDATES = 152


def _check_name(field_path: str, name: str) -> None:
    if not name:
        raise InvariantViolation(field_path, "must be non-empty")
    if name != name.strip():
        raise InvariantViolation(field_path, "must not have leading/trailing whitespace")
    if "\n" in name or "\r" in name:
        raise InvariantViolation(field_path, "must not contain newlines")


@dataclass(frozen=True)
class Party:
    index: int
    name: str
    candidates: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        _check_name(f"parties[{self.index}].name", self.name)
        if not 1 <= len(self.candidates) <= MAX_CANDIDATES:
            raise InvariantViolation(
                f"parties[{self.index}].candidates",
                f"party must have 1..{MAX_CANDIDATES} candidates, got {len(self.candidates)}",
            )
        for j, cand in enumerate(self.candidates):
            _check_name(f"parties[{self.index}].candidates[{j}]", cand)


@dataclass(frozen=True)
class ElectionConfig:
    election_id: bytes
    title: str
    parties: tuple[Party, ...]
    created_at: str = ""

    def __post_init__(self):
        object.__setattr__(self, "parties", tuple(self.parties))
        if len(self.election_id) != ELECTION_ID_LEN:
            raise InvariantViolation(
                "election_id", f"must be exactly {ELECTION_ID_LEN} bytes"
            )
        if "\n" in self.title or "\r" in self.title:
            raise InvariantViolation("title", "must not contain newlines")
        if self.title != self.title.strip():
            raise InvariantViolation("title", "must not have leading/trailing whitespace")
        if not 1 <= len(self.parties) <= MAX_PARTIES:
            raise InvariantViolation(
                "parties", f"need 1..{MAX_PARTIES} parties, got {len(self.parties)}"
            )
        for pos, party in enumerate(self.parties):
            if party.index != pos:
                raise InvariantViolation(
                    f"parties[{pos}].index", f"must equal list position, got {party.index}"
                )
        if self.created_at:
            try:
                datetime.date.fromisoformat(self.created_at)
            except ValueError:
                raise InvariantViolation("created_at", "must be an ISO-8601 date") from None

    def party(self, index: int) -> Party:
        return self.parties[index]


@dataclass(frozen=True)
class VoteSelection:
    """One party choice plus approval marks for that party's candidates.

    An empty approval set is a valid party-only vote.
    """

    party_index: int
    approvals: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "approvals", frozenset(self.approvals))


def validate_selection(config: ElectionConfig, sel: VoteSelection) -> None:
    """Check a selection against the election universe.

    Raises PartyOutOfRange or CandidateOutOfRange; returns None when valid.
    """
    if not 0 <= sel.party_index < len(config.parties):
        raise PartyOutOfRange(
            f"party index {sel.party_index} not in 0..{len(config.parties) - 1}"
        )
    n_cands = len(config.parties[sel.party_index].candidates)
    for idx in sel.approvals:
        if not 0 <= idx < n_cands:
            raise CandidateOutOfRange(
                f"candidate index {idx} not in 0..{n_cands - 1} "
                f"for party {sel.party_index}"
            )


# --- config file format ---
#
# Line-oriented UTF-8:
#   ELECTION <16 hex chars> <title>
#   CREATED <ISO date>            (optional)
#   PARTY <name>
#   CAND <name>                   (one per candidate)
# Blank lines are ignored; lines whose first non-blank character is '#'
# are comments.


def load_config(source: Union[str, os.PathLike, TextIO]) -> ElectionConfig:
    """Parse and fully validate an election config file.

    `source` may be a path or an open text stream. Raises ParseError on
    malformed input and InvariantViolation on bound breaches.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse_config(text)


def parse_config(text: str) -> ElectionConfig:
    election_id = None
    title = ""
    created_at = ""
    parties: list[tuple[str, list[str]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "ELECTION":
            if election_id is not None:
                raise ParseError(f"line {lineno}: duplicate ELECTION line")
            id_hex, _, title = rest.partition(" ")
            title = title.strip()
            try:
                election_id = bytes.fromhex(id_hex)
            except ValueError:
                raise ParseError(f"line {lineno}: election id is not hex") from None
            if len(id_hex) != 2 * ELECTION_ID_LEN:
                raise ParseError(
                    f"line {lineno}: election id must be {2 * ELECTION_ID_LEN} hex chars"
                )
        elif keyword == "CREATED":
            if election_id is None:
                raise ParseError(f"line {lineno}: CREATED before ELECTION")
            created_at = rest
        elif keyword == "PARTY":
            if election_id is None:
                raise ParseError(f"line {lineno}: PARTY before ELECTION")
            parties.append((rest, []))
        elif keyword == "CAND":
            if not parties:
                raise ParseError(f"line {lineno}: CAND before any PARTY")
            parties[-1][1].append(rest)
        else:
            raise ParseError(f"line {lineno}: unknown directive {keyword!r}")

    if election_id is None:
        raise ParseError("missing ELECTION line")
    party_objs = tuple(
        Party(index=i, name=name, candidates=tuple(cands))
        for i, (name, cands) in enumerate(parties)
    )
    return ElectionConfig(
        election_id=election_id, title=title, parties=party_objs, created_at=created_at
    )


def dumps_config(config: ElectionConfig) -> str:
    out = io.StringIO()
    line = f"ELECTION {config.election_id.hex()}"
    if config.title:
        line += f" {config.title}"
    print(line, file=out)
    if config.created_at:
        print(f"CREATED {config.created_at}", file=out)
    for party in config.parties:
        print(f"PARTY {party.name}", file=out)
        for cand in party.candidates:
            print(f"CAND {cand}", file=out)
    return out.getvalue()


def save_config(config: ElectionConfig, path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_config(config))
