"""Command-line front end: one election lives in one directory.

    election.cfg     election definition
    authority.key    blind-signature private key (hex fields)
    authority.pub    blind-signature public key
    registry.txt     VOTER lines (public)
    credentials.txt  SECRET lines (simulated voter eIDs; private)
    requests.log     REQ lines, the authority's durable state
    ballotbox.txt    mailed payload lines, append-only
    board.txt        hash-chained public bulletin board
    ballots/<id>.txt printable ballot artifacts
    notes/<id>.txt   voter note sheets

Every subcommand reads and writes only these files. Randomized steps take
--seed so a scripted run is reproducible byte for byte.

Exit codes: 0 success, 1 protocol error (stderr line `ERR <Code>: <msg>`),
2 usage, 3 negative verdict (gate BLOCK, audit cheat flag).
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import authority as authority_mod
from . import blindsig, board as board_mod, legacy, voter
from .election import ElectionConfig, VoteSelection, load_config, save_config
from .tally import (
    eligibility_audit,
    format_audit_report,
    format_tally_report,
    load_ballot_box,
    polling_gate,
    publish_tally,
    tally,
)
from .errors import ProtocolError, UnknownVoter
from .identity import (
    CredentialIssuer,
    load_registry,
    load_secrets,
    save_registry,
    save_secrets,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_VERDICT = 3


def _rng(seed: int | None) -> random.Random:
    return random.Random(seed) if seed is not None else random.SystemRandom()


class _Dir:
    """Path bundle for one election directory."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.config = self.root / "election.cfg"
        self.key = self.root / "authority.key"
        self.pub = self.root / "authority.pub"
        self.registry = self.root / "registry.txt"
        self.credentials = self.root / "credentials.txt"
        self.requests = self.root / "requests.log"
        self.ballotbox = self.root / "ballotbox.txt"
        self.board = self.root / "board.txt"
        self.ballots = self.root / "ballots"
        self.notes = self.root / "notes"

    def load_config(self) -> ElectionConfig:
        return load_config(self.config)

    def load_pub(self) -> blindsig.PublicKey:
        with self.pub.open() as fh:
            return blindsig.load_public_key(fh)

    def load_key(self) -> blindsig.BlindKeyPair:
        with self.key.open() as fh:
            return blindsig.load_keypair(fh)

    def load_registry(self) -> dict[str, bytes]:
        with self.registry.open() as fh:
            return load_registry(fh)

    def load_authority(self) -> authority_mod.SigningAuthority:
        auth = authority_mod.SigningAuthority(
            self.load_config(), self.load_key(), self.load_registry()
        )
        if self.requests.exists():
            with self.requests.open() as fh:
                auth.load_request_log(fh)
        return auth

    def save_requests(self, auth: authority_mod.SigningAuthority) -> None:
        with self.requests.open("w") as fh:
            auth.save_request_log(fh)

    def load_box(self) -> list[str]:
        if not self.ballotbox.exists():
            return []
        with self.ballotbox.open() as fh:
            return load_ballot_box(fh)

    def load_requests(self) -> list:
        if not self.requests.exists():
            return []
        with self.requests.open() as fh:
            return [
                authority_mod.parse_request(line.strip())
                for line in fh
                if line.strip()
            ]


def cmd_setup(args: argparse.Namespace) -> int:
    d = _Dir(args.dir)
    rng = _rng(args.seed)
    config = load_config(Path(args.config))
    d.root.mkdir(parents=True, exist_ok=True)
    d.ballots.mkdir(exist_ok=True)
    d.notes.mkdir(exist_ok=True)
    save_config(config, d.config)
    key = blindsig.keygen(args.bits, rng)
    with d.key.open("w") as fh:
        blindsig.save_keypair(key, fh)
    with d.pub.open("w") as fh:
        blindsig.save_public_key(key.public, fh)
    issuer = CredentialIssuer(rng)
    creds = [issuer.issue(f"V{i:04d}") for i in range(1, args.voters + 1)]
    with d.registry.open("w") as fh:
        save_registry(issuer.registry, fh)
    with d.credentials.open("w") as fh:
        save_secrets(creds, fh)
    d.requests.write_text("")
    d.ballotbox.write_text("")
    bb = board_mod.BulletinBoard(d.board)
    bb.append(
        "META",
        f"election {config.election_id.hex()} voters {len(creds)}".encode("ascii"),
    )
    print(
        f"election {config.election_id.hex()} dir={d.root} "
        f"voters={len(creds)} key_bits={key.n.bit_length()}"
    )
    return EXIT_OK


def cmd_vote(args: argparse.Namespace) -> int:
    d = _Dir(args.dir)
    rng = _rng(args.seed)
    config = d.load_config()
    with d.credentials.open() as fh:
        secrets = load_secrets(fh)
    if args.voter not in secrets:
        raise UnknownVoter(f"no credential for {args.voter!r} in {d.credentials}")
    cred = secrets[args.voter]
    sel = VoteSelection(
        party_index=args.party, approvals=frozenset(args.approve or ())
    )
    auth = d.load_authority()
    artifact, note = voter.prepare_and_cast(
        config, cred, sel, auth.key.public, auth.handle_request, rng
    )
    d.save_requests(auth)
    (d.ballots / f"{args.voter}.txt").write_text(artifact.text)
    (d.notes / f"{args.voter}.txt").write_text(note.text)
    if not args.no_mail:
        with d.ballotbox.open("a") as fh:
            fh.write(artifact.payload + "\n")
    print(artifact.payload)
    return EXIT_OK


def cmd_authority(args: argparse.Namespace) -> int:
    d = _Dir(args.dir)
    auth = d.load_authority()
    mailbox = Path(args.mailbox)
    with mailbox.open() as fh:
        responses = authority_mod.process_mailbox(auth, fh)
    out = Path(args.out) if args.out else mailbox.with_suffix(mailbox.suffix + ".rsp")
    out.write_text("".join(line + "\n" for line in responses))
    d.save_requests(auth)
    print(f"processed {len(responses)} requests, responses in {out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    d = _Dir(args.dir)
    config = d.load_config()
    pk = d.load_pub()
    if args.payload is not None:
        payload = args.payload
    else:
        payload = Path(args.file).read_text().strip().splitlines()[-1]
    sel = voter.verify_ballot(pk, config, payload)
    party = config.party(sel.party_index)
    print(f"VALID election {config.election_id.hex()}")
    print(f"PARTY: {party.name}")
    for i, cand in enumerate(party.candidates):
        print(f"{'FOR' if i in sel.approvals else 'AGAINST'} {cand}")
    return EXIT_OK


def cmd_tally(args: argparse.Namespace) -> int:
    d = _Dir(args.dir)
    config = d.load_config()
    pk = d.load_pub()
    result = tally(pk, config, d.load_box())
    requests = d.load_requests()
    audit = eligibility_audit(d.load_registry(), requests, result)
    if not args.no_publish:
        bb = board_mod.BulletinBoard(d.board)
        for req in requests:
            bb.append("REQUEST", authority_mod.format_request(req).encode("ascii"))
        publish_tally(bb, config, result, audit)
    sys.stdout.write(format_tally_report(config, result))
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    d = _Dir(args.dir)
    config = d.load_config()
    pk = d.load_pub()
    result = tally(pk, config, d.load_box())
    audit = eligibility_audit(d.load_registry(), d.load_requests(), result)
    sys.stdout.write(format_audit_report(audit))
    return EXIT_VERDICT if audit.cheat_flag else EXIT_OK


def cmd_gate(args: argparse.Namespace) -> int:
    d = _Dir(args.dir)
    registry = d.load_registry()
    if d.requests.exists():
        requested = {req.voter_id for req in d.load_requests()}
    else:
        requested = None
    verdict = polling_gate(
        registry, requested, args.voter_id, fail_open=args.fail_open
    )
    line = f"{verdict.verdict} {args.voter_id}"
    if verdict.reason:
        line += f" reason={verdict.reason}"
    print(line)
    return EXIT_OK if verdict.allow else EXIT_VERDICT


def cmd_legacy_sim(args: argparse.Namespace) -> int:
    config = load_config(Path(args.config))
    scenario = legacy.parse_scenario(Path(args.scenario).read_text())
    if args.seed is not None:
        scenario = legacy.LegacyScenario(
            honest=scenario.honest, compromised=scenario.compromised, seed=args.seed
        )
    bb = board_mod.BulletinBoard(args.board) if args.board else None
    report = legacy.run_scenario(config, scenario, bb)
    sys.stdout.write(legacy.format_scenario_report(report))
    return EXIT_OK


def cmd_board_verify(args: argparse.Namespace) -> int:
    path = Path(args.board) if args.board else _Dir(args.dir).board
    broken = board_mod.board_verify(path)
    if broken is None:
        count = len(board_mod.BulletinBoard(path).records()) if path.exists() else 0
        print(f"OK records={count}")
        return EXIT_OK
    print(f"ERR ChainBroken: first broken record seq={broken}", file=sys.stderr)
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindvote",
        description="Blind-signature postal voting, simulated at desk scale.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", help="create an election directory")
    p.add_argument("--dir", required=True, help="election directory to create")
    p.add_argument("--config", required=True, help="election config file to install")
    p.add_argument("--voters", type=int, required=True, help="credentials to issue")
    p.add_argument("--bits", type=int, default=2048, help="authority key size")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("vote", help="run the voter pipeline for one selection")
    p.add_argument("--dir", required=True)
    p.add_argument("--voter", required=True, help="voter id, e.g. V0001")
    p.add_argument("--party", type=int, required=True)
    p.add_argument(
        "--approve",
        type=int,
        action="append",
        help="candidate index to vote FOR (repeatable)",
    )
    p.add_argument("--seed", type=int, default=None)
    p.add_argument(
        "--no-mail",
        action="store_true",
        help="print and file the ballot but do not drop it in the ballot box",
    )
    p.set_defaults(func=cmd_vote)

    p = sub.add_parser("authority", help="answer a mailbox of REQ lines")
    p.add_argument("--dir", required=True)
    p.add_argument("--mailbox", required=True, help="file of REQ lines")
    p.add_argument("--out", default=None, help="response file (default <mailbox>.rsp)")
    p.set_defaults(func=cmd_authority)

    p = sub.add_parser("verify", help="check a ballot payload and show the vote")
    p.add_argument("--dir", required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--payload", help="payload line BPV1|...")
    src.add_argument("--file", help="ballot file; last line is the payload")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tally", help="count the ballot box and publish evidence")
    p.add_argument("--dir", required=True)
    p.add_argument("--no-publish", action="store_true", help="skip board records")
    p.set_defaults(func=cmd_tally)

    p = sub.add_parser("audit", help="eligibility audit; exit 3 when cheating shows")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("gate", help="polling-station check; exit 3 means BLOCK")
    p.add_argument("--dir", required=True)
    p.add_argument("voter_id")
    p.add_argument(
        "--fail-open",
        action="store_true",
        help="ALLOW when the request log is unavailable (default is BLOCK)",
    )
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("legacy-sim", help="run a token-k scenario file")
    p.add_argument("scenario", help="scenario file (HONEST/COMPROMISED/SEED lines)")
    p.add_argument("--config", required=True, help="election config file")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--board", default=None, help="publish CODE_PUBLISH records here")
    p.set_defaults(func=cmd_legacy_sim)

    p = sub.add_parser("board", help="bulletin board operations")
    board_sub = p.add_subparsers(dest="board_command", required=True)
    pv = board_sub.add_parser("verify", help="recompute the hash chain")
    loc = pv.add_mutually_exclusive_group(required=True)
    loc.add_argument("--dir", default=None, help="election directory")
    loc.add_argument("--board", default=None, help="board file path")
    pv.set_defaults(func=cmd_board_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProtocolError as exc:
        print(f"ERR {exc.code}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except FileNotFoundError as exc:
        print(f"ERR IoFailure: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
