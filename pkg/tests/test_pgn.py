import io

import pytest

from conftest import fixture_path
from gameintel.pgn import (
    PgnStreamError,
    format_clock,
    parse_eval,
    parse_pgn,
    parse_pgn_text,
    read_pgn,
    write_pgn,
)
from gameintel.wdl import CentipawnEval

FIXTURES = ["three_games.pgn", "twenty_ply.pgn", "filter_ten.pgn"]


def test_minimal_game():
    (rec,) = parse_pgn_text("1. e4 e5 1/2-1/2\n")
    assert [p.san for p in rec.plies] == ["e4", "e5"]
    assert rec.result == "1/2-1/2"
    assert all(p.eval_after is None for p in rec.plies)


def test_unicode_half_result():
    (rec,) = parse_pgn_text("1. e4 e5 ½-½\n")
    assert rec.result == "1/2-1/2"


def test_mate_eval_and_clock():
    (rec,) = parse_pgn_text("1. e4 {[%eval #-3] [%clk 0:03:07.5]} e5 *\n")
    assert rec.plies[0].eval_after == CentipawnEval.mate(-3)
    assert rec.plies[0].clock == pytest.approx(187.5)
    assert rec.plies[1].eval_before == CentipawnEval.mate(-3)
    assert not rec.finished


def test_eval_with_depth_suffix():
    assert parse_eval("0.35") == CentipawnEval.cp(35)
    assert parse_eval("-1.2") == CentipawnEval.cp(-120)
    (rec,) = parse_pgn_text("1. d4 {[%eval 0.17,23]} *\n")
    assert rec.plies[0].eval_after == CentipawnEval.cp(17)


def test_malformed_fixture_skips_bad_game():
    diags = []
    recs = read_pgn(fixture_path("with_malformed.pgn"), diags)
    assert [r.headers["Event"] for r in recs] == ["Good One", "Good Two"]
    errors = [d for d in diags if d.severity == "error"]
    assert len(errors) == 1
    assert errors[0].game_number == 2
    assert "Ke3" in errors[0].message


def test_checkmate_detected_on_board():
    recs = read_pgn(fixture_path("with_malformed.pgn"))
    assert recs[1].termination == "checkmate"
    assert recs[0].termination is None


def test_variations_and_nags_ignored():
    (rec,) = parse_pgn_text("1. e4 $1 (1. d4 d5 (1... Nf6)) 1... e5!? {ok} 2. Nf3 *\n")
    assert [p.san for p in rec.plies] == ["e4", "e5", "Nf3"]


def test_result_header_is_authoritative():
    diags = []
    (rec,) = parse_pgn_text('[Result "0-1"]\n\n1. e4 e5 1-0\n', diags)
    assert rec.result == "0-1"
    assert any(d.severity == "warning" for d in diags)


def test_unterminated_comment_is_stream_error():
    data = '[Event "x"]\n\n1. e4 {never closed\n'.encode()
    with pytest.raises(PgnStreamError) as info:
        list(parse_pgn(io.BytesIO(data)))
    assert info.value.offset == data.index(b"{")


def test_black_first_from_fen():
    text = '[FEN "4k3/8/8/8/8/8/4P3/4K3 b - - 0 1"]\n[SetUp "1"]\n\n1... Kd7 2. e4 *\n'
    (rec,) = parse_pgn_text(text)
    assert not rec.white_first
    assert [p.uci for p in rec.plies] == ["e8d7", "e2e4"]


def test_streaming_does_not_need_whole_file():
    game = b'[Event "e"]\n[Result "*"]\n\n1. e4 e5 *\n\n'

    class Source(io.RawIOBase):
        def __init__(self):
            self.served = 0

        def readable(self):
            return True

        def readinto(self, buf):
            if self.served >= 10_000:
                return 0
            n = min(len(buf), len(game))
            buf[:n] = game[:n]
            self.served += 1
            return n

    it = parse_pgn(io.BufferedReader(Source(), buffer_size=64))
    first = next(it)
    assert first.headers["Event"] == "e"


@pytest.mark.parametrize("name", FIXTURES)
def test_round_trip_fixed_point(name):
    recs = read_pgn(fixture_path(name))
    text = "\n".join(write_pgn(r) for r in recs)
    again = parse_pgn_text(text)
    assert again == recs
    assert "\n".join(write_pgn(r) for r in again) == text


def test_clock_format():
    assert format_clock(3599) == "0:59:59"
    assert format_clock(7200.25) == "2:00:00.25"
