from __future__ import annotations

import hashlib
import threading

import pytest

from blindvote.board import KINDS, BoardRecord, BulletinBoard, board_append, board_verify
from blindvote.errors import ChainBroken


def test_genesis_chain_value(tmp_path):
    # First record hashes against 32 zero bytes, by construction.
    path = tmp_path / "board.txt"
    board = BulletinBoard(path)
    rec = board.append("META", b"hello")
    payload_b64 = rec.line.split("|")[2]
    expected = hashlib.sha256(b"\x00" * 32 + f"0|META|{payload_b64}".encode("ascii"))
    assert rec.seq == 0
    assert rec.chain == expected.digest()
    assert rec.line.strip().endswith(expected.hexdigest())


def test_sequence_numbers(tmp_path):
    board = BulletinBoard(tmp_path / "board.txt")
    for i in range(41):
        rec = board.append("META", f"r{i}".encode())
        assert rec.seq == i
    assert len(board.records()) == 41


def test_records_round_trip(tmp_path):
    path = tmp_path / "board.txt"
    board = BulletinBoard(path)
    payloads = [b"one", b"two|with|pipes", b"\x00\xffbinary", b""]
    for p in payloads:
        board.append("BALLOT_DIGEST", p)
    fresh = BulletinBoard(path)
    assert [r.payload for r in fresh.records()] == payloads
    assert all(r.kind == "BALLOT_DIGEST" for r in fresh.records())


def test_verify_clean_board_of_1000(tmp_path):
    path = tmp_path / "board.txt"
    board = BulletinBoard(path)
    for i in range(1000):
        board.append(KINDS[i % len(KINDS)], i.to_bytes(2, "big"))
    assert board_verify(path) is None


def test_verify_missing_and_empty(tmp_path):
    assert board_verify(tmp_path / "nope.txt") is None
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    assert board_verify(empty) is None


def test_tamper_detection_points_at_first_bad_record(tmp_path):
    path = tmp_path / "board.txt"
    board = BulletinBoard(path)
    for i in range(10):
        board.append("META", f"record {i}".encode())
    lines = path.read_text().splitlines()
    seq, kind, payload_b64, chain = lines[4].split("|")
    forged = "|".join((seq, kind, "Zm9yZ2Vk", chain))
    path.write_text("\n".join(lines[:4] + [forged] + lines[5:]) + "\n")
    assert board_verify(path) == 4


def test_truncation_detected(tmp_path):
    path = tmp_path / "board.txt"
    board = BulletinBoard(path)
    for i in range(6):
        board.append("META", str(i).encode())
    lines = path.read_text().splitlines()
    del lines[2]
    path.write_text("\n".join(lines) + "\n")
    # Record 3 now sits at position 2 and its back-link no longer matches.
    assert board_verify(path) == 2


def test_garbled_line_detected(tmp_path):
    path = tmp_path / "board.txt"
    board = BulletinBoard(path)
    for i in range(3):
        board.append("META", str(i).encode())
    with path.open("a") as f:
        f.write("not a record at all\n")
    assert board_verify(path) == 3


def test_append_to_corrupt_board_refused(tmp_path):
    path = tmp_path / "board.txt"
    board = BulletinBoard(path)
    for i in range(5):
        board.append("META", str(i).encode())
    text = path.read_text()
    path.write_text(text.replace("record", "").replace("|META|", "|TALLY|", 1))
    with pytest.raises(ChainBroken) as exc_info:
        board.append("META", b"more")
    assert exc_info.value.seq == 0


def test_bad_kind_rejected(tmp_path):
    board = BulletinBoard(tmp_path / "board.txt")
    with pytest.raises(ValueError):
        board.append("GOSSIP", b"x")


def test_module_level_helpers(tmp_path):
    path = tmp_path / "board.txt"
    rec = board_append(path, "AUDIT", b"summary")
    assert isinstance(rec, BoardRecord)
    assert board_verify(path) is None


def test_concurrent_appends_from_threads(tmp_path):
    path = tmp_path / "board.txt"
    board = BulletinBoard(path)
    errors = []

    def worker(i: int) -> None:
        try:
            board.append("REQUEST", f"w{i}".encode())
        except Exception as e:  # pragma: no cover - failure detail
            errors.append(e)

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(32)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    records = board.records()
    assert [r.seq for r in records] == list(range(32))
    assert board_verify(path) is None


def test_two_instances_interleaved(tmp_path):
    # Separate handles on the same file must still form one chain.
    path = tmp_path / "board.txt"
    a = BulletinBoard(path)
    b = BulletinBoard(path)
    for i in range(10):
        (a if i % 2 == 0 else b).append("META", str(i).encode())
    assert board_verify(path) is None
    assert len(a.records()) == 10
