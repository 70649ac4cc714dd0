"""The signing authority: eligibility checks and one blind signature per voter.

The authority holds the election's blind key pair and the voter registry.
It never sees a ballot in the clear; every value crossing its boundary is
blinded, and its persisted state (the request log) contains only voter ids,
blinded integers, and credential signatures.

The one-signature-per-voter rule is the double-voting defence: the request
log doubles as the polling-station "has voted" list, and its length bounds
the number of valid ballots any honest count can contain. A corrupt
authority that signs extra ballots cannot shrink that gap; the audit
compares ballots against voter-signed requests it cannot forge.
"""

from __future__ import annotations

import threading
from typing import Iterable, TextIO

from . import blindsig
from .board import BulletinBoard
from .election import ElectionConfig
from .errors import (
    AlreadyRequested,
    BadFraming,
    CorruptModeDisabled,
    ProtocolError,
    WrongElection,
    error_by_code,
)
from .identity import SigningRequest, verify_request


class SigningAuthority:
    """Checks eligibility, signs blinded ballots, remembers who asked.

    handle_request is atomic: the eligibility check, the log write and the
    signing happen under one lock, so concurrent duplicate requests cannot
    both succeed. A rejected request leaves no trace and does not consume
    the voter's single-request budget.
    """

    def __init__(
        self,
        config: ElectionConfig,
        key: blindsig.BlindKeyPair,
        registry: dict[str, bytes],
        *,
        allow_corrupt: bool = False,
    ) -> None:
        self.config = config
        self.key = key
        self.registry = dict(registry)
        self.allow_corrupt = allow_corrupt
        self._log: dict[str, SigningRequest] = {}
        self._order: list[str] = []
        self._issued_count = 0
        self._lock = threading.Lock()

    @property
    def issued_count(self) -> int:
        """Signatures issued, including any corrupt ones."""
        return self._issued_count

    @property
    def request_count(self) -> int:
        return len(self._log)

    def handle_request(self, req: SigningRequest) -> int:
        """Verify eligibility and return sign_blinded(req.blinded).

        Check order: election id, registration, credential signature,
        then the one-request budget.
        """
        if req.election_id != self.config.election_id:
            raise WrongElection(
                f"request for election {req.election_id.hex()}, "
                f"this authority serves {self.config.election_id.hex()}"
            )
        with self._lock:
            verify_request(self.registry, req)
            if req.voter_id in self._log:
                raise AlreadyRequested(f"{req.voter_id!r} already holds a signature")
            signature = blindsig.sign_blinded(req.blinded, self.key)
            self._log[req.voter_id] = req
            self._order.append(req.voter_id)
            self._issued_count += 1
            return signature

    def has_requested(self, voter_id: str) -> bool:
        with self._lock:
            return voter_id in self._log

    def export_request_log(
        self, board: BulletinBoard | None = None
    ) -> list[tuple[str, int, bytes]]:
        """Snapshot of (voter_id, blinded, credential signature) in arrival order.

        When a board is given, each entry is also published as a REQUEST
        record so auditors can count voter-signed requests independently.
        """
        with self._lock:
            snapshot = [
                (
                    vid,
                    self._log[vid].blinded,
                    self._log[vid].credential_signature,
                )
                for vid in self._order
            ]
            requests = [self._log[vid] for vid in self._order]
        if board is not None:
            for req in requests:
                board.append("REQUEST", format_request(req).encode("ascii"))
        return snapshot

    def corrupt_sign(self, blinded: int) -> int:
        """Sign without logging a request. Adversarial harness only."""
        if not self.allow_corrupt:
            raise CorruptModeDisabled("authority is running in honest mode")
        with self._lock:
            signature = blindsig.sign_blinded(blinded, self.key)
            self._issued_count += 1
            return signature

    def save_request_log(self, out: TextIO) -> None:
        """Persist the log as REQ lines (the authority's only durable state)."""
        with self._lock:
            for vid in self._order:
                out.write(format_request(self._log[vid]) + "\n")

    def load_request_log(self, src: TextIO) -> None:
        """Restore a previously saved log (replaces the in-memory log)."""
        log: dict[str, SigningRequest] = {}
        order: list[str] = []
        for line in src:
            line = line.strip()
            if not line:
                continue
            req = parse_request(line)
            if req.voter_id in log:
                raise BadFraming(f"duplicate request for {req.voter_id!r} in log")
            log[req.voter_id] = req
            order.append(req.voter_id)
        with self._lock:
            self._log = log
            self._order = order
            self._issued_count = len(log)


# --- text framing for the file-based mailbox ---
#
#   REQ <voter_id> <election_id hex> <blinded hex> <sig hex>
#   RSP OK <blindedsig hex>
#   RSP ERR <code>


def format_request(req: SigningRequest) -> str:
    return (
        f"REQ {req.voter_id} {req.election_id.hex()} "
        f"{req.blinded:x} {req.credential_signature.hex()}"
    )


def parse_request(line: str) -> SigningRequest:
    parts = line.split()
    if len(parts) != 5 or parts[0] != "REQ":
        raise BadFraming("expected 'REQ <voter_id> <election_id> <blinded> <sig>'")
    try:
        election_id = bytes.fromhex(parts[2])
        blinded = int(parts[3], 16)
        signature = bytes.fromhex(parts[4])
    except ValueError:
        raise BadFraming("non-hex field in REQ line") from None
    return SigningRequest(
        voter_id=parts[1],
        election_id=election_id,
        blinded=blinded,
        credential_signature=signature,
    )


def format_response(result: int | ProtocolError) -> str:
    if isinstance(result, ProtocolError):
        return f"RSP ERR {result.code}"
    return f"RSP OK {result:x}"


def parse_response(line: str) -> int:
    """Decode a response line; error responses re-raise as their class."""
    parts = line.split()
    if len(parts) == 3 and parts[0] == "RSP" and parts[1] == "OK":
        try:
            return int(parts[2], 16)
        except ValueError:
            raise BadFraming("RSP OK value is not hex") from None
    if len(parts) == 3 and parts[0] == "RSP" and parts[1] == "ERR":
        raise error_by_code(parts[2])(f"authority rejected request: {parts[2]}")
    raise BadFraming("expected 'RSP OK <hex>' or 'RSP ERR <code>'")


def process_mailbox(authority: SigningAuthority, lines: Iterable[str]) -> list[str]:
    """Serve a batch of REQ lines, one RSP line per non-blank input line."""
    responses: list[str] = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            req = parse_request(line)
            responses.append(format_response(authority.handle_request(req)))
        except ProtocolError as exc:
            responses.append(format_response(exc))
    return responses
