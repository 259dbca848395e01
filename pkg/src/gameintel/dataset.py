"""Line-delimited JSON persistence for games and metrics.

The first line of every file is a header object naming the format, schema
version and record kind; each following line is one game.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Iterator, Optional

from .ingest import GameAnalysis
from .metrics import PlayerGameMetrics
from .pgn import GameRecord, Ply, chain_evals
from .wdl import CentipawnEval

FORMAT = "gameintel"
SCHEMA_VERSION = 1


class SchemaError(ValueError):
    pass


def _eval_to_json(ev: Optional[CentipawnEval]):
    if ev is None:
        return None
    return {ev.kind: ev.value}


def _eval_from_json(obj) -> Optional[CentipawnEval]:
    if obj is None:
        return None
    (kind, value), = obj.items()
    return CentipawnEval(kind, int(value), "white")


def game_to_json(rec: GameRecord) -> dict:
    return {
        "headers": rec.headers,
        "start_fen": rec.start_fen,
        "result": rec.result,
        "termination": rec.termination,
        "plies": [
            {"san": p.san, "uci": p.uci, "eval": _eval_to_json(p.eval_after), "clk": p.clock}
            for p in rec.plies
        ],
    }


def game_from_json(obj: dict) -> GameRecord:
    plies = [
        Ply(san=p["san"], uci=p["uci"], eval_after=_eval_from_json(p.get("eval")), clock=p.get("clk"))
        for p in obj["plies"]
    ]
    return GameRecord(
        headers=dict(obj["headers"]),
        plies=chain_evals(plies),
        result=obj["result"],
        start_fen=obj["start_fen"],
        termination=obj.get("termination"),
    )


def player_to_json(m: PlayerGameMetrics) -> dict:
    return {
        "player": m.player_id,
        "color": m.color,
        "reward": m.reward,
        "gpl": m.gpl,
        "gi": m.gi,
        "egi": m.egi,
        "accuracy": m.accuracy,
        "moves": m.move_count,
    }


def player_from_json(obj: dict) -> PlayerGameMetrics:
    return PlayerGameMetrics(
        player_id=obj["player"],
        color=obj["color"],
        reward=obj["reward"],
        gpl=obj["gpl"],
        gi=obj["gi"],
        egi=obj["egi"],
        accuracy=obj["accuracy"],
        move_count=obj["moves"],
    )


def analysis_to_json(a: GameAnalysis) -> dict:
    return {
        "index": a.index,
        "headers": a.headers,
        "white": player_to_json(a.white),
        "black": player_to_json(a.black),
        "skipped_gap_plies": list(a.skipped_gap_plies),
        "skipped_lost_plies": list(a.skipped_lost_plies),
    }


def analysis_from_json(obj: dict) -> GameAnalysis:
    return GameAnalysis(
        index=obj["index"],
        headers=dict(obj["headers"]),
        white=player_from_json(obj["white"]),
        black=player_from_json(obj["black"]),
        skipped_gap_plies=tuple(obj.get("skipped_gap_plies", ())),
        skipped_lost_plies=tuple(obj.get("skipped_lost_plies", ())),
    )


_ENCODERS = {"games": game_to_json, "metrics": analysis_to_json}
_DECODERS = {"games": game_from_json, "metrics": analysis_from_json}


def _dump(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def dataset_write(items: Iterable, path, kind: str = "games", config: Optional[dict] = None) -> int:
    """Write ``items`` one per line after a header; returns the number written."""
    encode = _ENCODERS[kind]
    header = {"format": FORMAT, "version": SCHEMA_VERSION, "kind": kind}
    if config:
        header["config"] = config
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_dump(header) + "\n")
        for item in items:
            fh.write(_dump(encode(item)) + "\n")
            n += 1
    return n


def read_header(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return _check_header(fh.readline(), path)


def _check_header(line: str, path) -> dict:
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: first line is not a dataset header") from exc
    if not isinstance(header, dict) or header.get("format") != FORMAT:
        raise SchemaError(f"{path}: not a {FORMAT} dataset")
    if header.get("version") != SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: schema version {header.get('version')!r}, expected {SCHEMA_VERSION}"
        )
    return header


def dataset_read(path, kind: Optional[str] = None) -> Iterator:
    """Stream records back; the file is never loaded whole."""
    with open(path, encoding="utf-8") as fh:
        header = _check_header(fh.readline(), path)
        if kind is not None and header.get("kind") != kind:
            raise SchemaError(f"{path}: holds {header.get('kind')!r} records, expected {kind!r}")
        decode = _DECODERS[header["kind"]]
        for lineno, line in enumerate(fh, start=2):
            if line.strip():
                try:
                    yield decode(json.loads(line))
                except (KeyError, ValueError, TypeError) as exc:
                    raise SchemaError(f"{path}:{lineno}: malformed record: {exc}") from exc


METRIC_COLUMNS = (
    "index", "event", "date", "round", "player", "opponent", "color", "elo", "opponent_elo",
    "reward", "gpl", "gi", "egi", "accuracy", "moves",
)


def metrics_csv(analyses: Iterable[GameAnalysis]) -> str:
    """One CSV row per player per game, full float precision."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(METRIC_COLUMNS)
    for a in analyses:
        h = a.headers
        for m, opp, elo, opp_elo in (
            (a.white, a.black, h.get("WhiteElo", ""), h.get("BlackElo", "")),
            (a.black, a.white, h.get("BlackElo", ""), h.get("WhiteElo", "")),
        ):
            w.writerow([
                a.index, h.get("Event", ""), h.get("Date", ""), h.get("Round", ""),
                m.player_id, opp.player_id, m.color, elo, opp_elo,
                _num(m.reward), _num(m.gpl), _num(m.gi), _num(m.egi), _num(m.accuracy), m.move_count,
            ])
    return buf.getvalue()


def _num(x) -> str:
    return "" if x is None else repr(float(x))
