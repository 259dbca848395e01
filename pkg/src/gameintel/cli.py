"""Command-line entry point.

Each subcommand reads its inputs, writes one output and echoes the settings
that produced it into the output header. A ``--config`` file of ``key=value``
lines supplies defaults; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

from . import __version__
from .core import RewardScheme
from .dataset import SchemaError, dataset_read, dataset_write, metrics_csv, read_header
from .engine import ENGINE_ENV, EngineConfig, EngineError, EnginePool
from .game_lab import parse_mechanism, run_lab
from .ingest import DEFAULT_EXCLUDED, AnalysisOptions, FilterSpec, analyze_game, filter_games
from .pgn import GameParseError, PgnStreamError, parse_eval, parse_pgn
from .stats import (
    comparison_matrix,
    histogram,
    histogram_csv,
    matrix_csv,
    matrix_text,
    orientation_note,
    summarize,
    summary_csv,
    summary_markdown,
)
from .wdl import (
    CP_CAP,
    DRAW_MAX,
    DRAW_TAU,
    LOGISTIC_K,
    MATE_CAP,
    UnboundedPerformanceError,
    elo_expected_score,
    make_model,
    tournament_performance_rating,
)

log = logging.getLogger("gameintel")


class CliError(Exception):
    """A named failure reported on stderr with exit code 1."""


# --- config handling ------------------------------------------------------

def load_config(path: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment. Keys use dots or dashes freely."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{os.path.basename(path)}:{n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.lower().replace(".", "_").replace("-", "_")] = v
    return out


def _coerce(parser: argparse.ArgumentParser, values: dict) -> dict:
    """Convert config strings with the matching option's ``type``."""
    actions = {a.dest: a for a in parser._actions}
    out = {}
    for k, v in values.items():
        a = actions.get(k)
        if a is None:
            continue
        if isinstance(a, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            flag = v.lower() in ("1", "true", "yes", "on")
            out[k] = flag if isinstance(a, argparse._StoreTrueAction) else not flag
        elif a.type is not None:
            try:
                out[k] = a.type(v)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise CliError(f"config key {k}: {exc}") from None
        else:
            out[k] = v
        if a.choices is not None and out[k] not in a.choices:
            raise CliError(f"config key {k}: {v!r} not one of {sorted(a.choices)}")
    return out


def _echo(args: argparse.Namespace) -> dict:
    """Settings worth recording, with paths reduced to file names."""
    skip = {"func", "command", "config", "output", "log_level", "csv", "workers"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        if k in ("inputs", "input", "engine_path"):
            v = [os.path.basename(p) for p in v] if isinstance(v, list) else os.path.basename(v)
        out[k] = v
    return out


def _echo_lines(args: argparse.Namespace) -> list[str]:
    cfg = _echo(args)
    return [f"gameintel {args.command}"] + [
        f"{k}={','.join(map(str, v)) if isinstance(v, list) else v}" for k, v in cfg.items()
    ]


def _write_text(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _require_file(path: str) -> None:
    if not os.path.isfile(path):
        raise CliError(f"input not found: {path}")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


# --- subcommands ----------------------------------------------------------

def cmd_ingest(args) -> int:
    for p in args.inputs:
        _require_file(p)
    diagnostics: list = []
    records = []
    for p in args.inputs:
        with open(p, "rb") as fh:
            try:
                for rec in parse_pgn(fh, diagnostics):
                    records.append(rec)
            except PgnStreamError as exc:
                raise CliError(f"{os.path.basename(p)}: {exc}") from None
    spec = FilterSpec(
        min_elo=args.min_elo,
        classical_only=not args.all_events,
        excluded_keywords=tuple(_csv_list(args.exclude)) if args.exclude is not None else DEFAULT_EXCLUDED,
        players=tuple(_csv_list(args.players)) if args.players else (),
    )
    kept, report = filter_games(records, spec)
    dataset_write(kept, args.output, "games", config=_echo(args))
    lines = [f"parsed={len(records)} kept={report.kept} excluded={len(report.excluded)} "
             f"diagnostics={len(diagnostics)}"]
    lines += [f"excluded game={i + 1} reason={reason}" for i, reason in report.excluded]
    lines += [f"diagnostic {d}" for d in diagnostics]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_annotate(args) -> int:
    _require_file(args.input)
    command = args.engine_path or os.environ.get(ENGINE_ENV)
    if not command:
        raise CliError(f"no engine: pass --engine-path or set {ENGINE_ENV}")
    options = [("Threads", str(args.engine_threads))] if args.engine_threads else []
    if args.hash:
        options.append(("Hash", str(args.hash)))
    cfg = EngineConfig(command=command, depth=args.depth, options=tuple(options),
                       time_limit=args.time_limit, pool_size=args.pool)
    out, failures, filled = [], [], 0
    try:
        with EnginePool(cfg) as pool:
            for n, rec in enumerate(dataset_read(args.input, "games"), 1):
                new, rep = pool.annotate_game(rec)
                out.append(new)
                filled += rep.filled
                failures += [(n, k, msg) for k, msg in rep.failures]
            calls = pool.calls
    except EngineError as exc:
        raise CliError(str(exc)) from None
    dataset_write(out, args.output, "games", config=_echo(args))
    lines = [f"games={len(out)} filled={filled} engine_calls={calls} failures={len(failures)}"]
    lines += [f"failure game={g} ply={k} message={m}" for g, k, m in failures]
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _build_model(args):
    params = dict(k=args.wdl_k, mate_cap=args.wdl_mate_cap, cp_cap=args.wdl_cp_cap)
    if args.wdl_model == "human" and args.es_w is not None:
        params.update(es_w=args.es_w, es_b=args.es_b if args.es_b is not None else 1 - args.es_w)
    return make_model(args.wdl_model, d_max=args.wdl_draw_d_max, tau=args.wdl_draw_tau, **params)


def _analyze_one(job):
    index, rec, model, scheme, options = job
    return analyze_game(rec, model, scheme, options, index)


def _load_games(path: str) -> list:
    if path.lower().endswith(".pgn"):
        with open(path, "rb") as fh:
            return list(parse_pgn(fh))
    return list(dataset_read(path, "games"))


def cmd_analyze(args) -> int:
    _require_file(args.input)
    model = _build_model(args)
    scheme = RewardScheme.win_draw_loss(win=args.win, draw=args.draw, loss=args.loss)
    options = AnalysisOptions(
        root_eval=parse_eval(args.root_eval),
        gap_policy=args.gap_policy,
        skip_opening=args.skip_opening,
        accuracy_skip_lost=args.accuracy_skip_lost,
        unfinished=args.unfinished,
    )
    games = _load_games(args.input)
    jobs = [(i, rec, model, scheme, options) for i, rec in enumerate(games, 1)
            if rec.finished or options.unfinished != "skip"]
    if args.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as ex:
            results = list(ex.map(_analyze_one, jobs, chunksize=max(1, len(jobs) // (4 * args.workers))))
    else:
        results = [_analyze_one(j) for j in jobs]
    config = _echo(args)
    config["model_detail"] = model.describe()
    dataset_write(results, args.output, "metrics", config=config)
    if args.csv:
        text = "".join(f"# {line}\n" for line in _echo_lines(args)) + metrics_csv(results)
        _write_text(args.csv, text)
    gaps = sum(len(r.skipped_gap_plies) for r in results)
    lost = sum(len(r.skipped_lost_plies) for r in results)
    sys.stdout.write(f"games={len(results)} skipped_gap_plies={gaps} skipped_lost_plies={lost}\n")
    return 0


def _player_rows(path: str):
    """(group fields, metrics) per player per game from a metrics dataset."""
    header = read_header(path)
    if header.get("kind") != "metrics":
        raise SchemaError(f"{os.path.basename(path)}: holds {header.get('kind')!r} records, expected 'metrics'")
    for a in dataset_read(path, "metrics"):
        year = a.headers.get("Date", "")[:4]
        for m in (a.white, a.black):
            yield {"player": m.player_id, "color": m.color, "event": a.headers.get("Event", ""),
                   "year": year}, m, a


GROUP_KEYS = ("player", "color", "event", "year")


def cmd_report(args) -> int:
    _require_file(args.input)
    keys = _csv_list(args.group)
    bad = [k for k in keys if k not in GROUP_KEYS]
    if bad or not keys:
        raise CliError(f"unknown group keys {bad}; choose from {list(GROUP_KEYS)}")
    items = [(" / ".join(fields[k] for k in keys), m) for fields, m, _ in _player_rows(args.input)]
    rows = summarize(items, args.stat)
    comments = _echo_lines(args)
    if args.format == "md":
        text = summary_markdown(rows, args.stat, comments)
    else:
        text = summary_csv(rows, args.stat, comments)
    _write_text(args.output, text)
    return 0


def cmd_compare(args) -> int:
    _require_file(args.input)
    samples = defaultdict(list)
    for fields, m, _ in _player_rows(args.input):
        samples[fields["player"]].append(m)
    players = _csv_list(args.players) if args.players else sorted(samples)
    missing = [p for p in players if p not in samples]
    if missing:
        raise CliError(f"no games for players {missing}")
    grid = comparison_matrix(samples, players, args.color, args.alternative, args.method)
    comments = _echo_lines(args) + [orientation_note(args.alternative)]
    if args.format == "text":
        text = matrix_text(grid, players, comments)
    else:
        text = matrix_csv(grid, players, comments)
    _write_text(args.output, text)
    return 0


def _tpr_inputs(path: str) -> dict:
    """player -> (scores, opponent ratings) from a results CSV or a metrics dataset."""
    out: dict = defaultdict(lambda: ([], []))
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if first.lstrip().startswith("{"):
        for fields, m, a in _player_rows(path):
            opp_key = "BlackElo" if m.color == "white" else "WhiteElo"
            try:
                opp = float(a.headers[opp_key])
            except (KeyError, ValueError):
                raise CliError(f"game {a.index}: missing {opp_key}") from None
            if m.reward is None:
                continue
            out[m.player_id][0].append(m.reward)
            out[m.player_id][1].append(opp)
        return out
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        need = {"player", "opponent_rating", "score"}
        if rows.fieldnames is None or not need <= set(rows.fieldnames):
            raise CliError(f"results file needs columns {sorted(need)}")
        for n, row in enumerate(rows, 2):
            try:
                out[row["player"]][0].append(float(row["score"]))
                out[row["player"]][1].append(float(row["opponent_rating"]))
            except ValueError:
                raise CliError(f"results line {n}: bad number") from None
    return out


def cmd_tpr(args) -> int:
    _require_file(args.input)
    data = _tpr_inputs(args.input)
    buf = io.StringIO()
    buf.write("".join(f"# {line}\n" for line in _echo_lines(args)))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Player", "Games", "Score", "AvgOpp", "Expected", "TPR"])
    rows = []
    for player, (scores, opps) in data.items():
        try:
            tpr = tournament_performance_rating(scores, opps)
        except UnboundedPerformanceError as exc:
            tpr = exc.sentinel
        rows.append((player, scores, opps, tpr))
    rows.sort(key=lambda r: (-r[3], r[0]))
    for player, scores, opps, tpr in rows:
        avg = sum(opps) / len(opps)
        expected = sum(elo_expected_score(tpr, o) for o in opps) if abs(tpr) != float("inf") else ""
        w.writerow([player, len(scores), f"{sum(scores):g}", f"{avg:.1f}",
                    "" if expected == "" else f"{expected:.3f}",
                    "+inf" if tpr == float("inf") else "-inf" if tpr == float("-inf") else f"{tpr:.1f}"])
    _write_text(args.output, buf.getvalue())
    return 0


def cmd_hist(args) -> int:
    _require_file(args.input)
    values = [getattr(m, args.metric) for fields, m, _ in _player_rows(args.input)
              if (args.player is None or fields["player"] == args.player)
              and (args.color is None or m.color == args.color)
              and getattr(m, args.metric) is not None]
    edges, counts = histogram(values, args.width)
    _write_text(args.output, histogram_csv(edges, counts, _echo_lines(args)))
    return 0


def cmd_lab(args) -> int:
    try:
        mech = parse_mechanism(args.mechanism)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if args.games < 1 or args.depth < 1 or args.branch < 1:
        raise CliError("--games, --depth and --branch must be at least 1")
    results = run_lab(args.seed, args.games, args.depth, args.branch, mech)
    lines = [f"# {line}" for line in _echo_lines(args)]
    lines += [r.summary_line() for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"overall={'PASS' if ok else 'FAIL'}")
    _write_text(args.output, "\n".join(lines) + "\n")
    return 0 if ok else 3


# --- parser ---------------------------------------------------------------

def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gameintel", description="Game intelligence metrics for chess games.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="key=value defaults file; command-line flags win")
    p.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="parse and filter PGN files into a games dataset")
    s.add_argument("inputs", nargs="+")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--min-elo", type=int, default=2500)
    s.add_argument("--all-events", action="store_true", help="keep rapid, blitz and other non-classical events")
    s.add_argument("--exclude", help="comma-separated event keywords (default: %s)" % ",".join(DEFAULT_EXCLUDED))
    s.add_argument("--players", help="comma-separated allowlist")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("annotate", help="fill missing evaluations with a UCI engine")
    s.add_argument("input")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--engine-path", help=f"engine command (default: ${ENGINE_ENV})")
    s.add_argument("--depth", type=int, default=20)
    s.add_argument("--engine-threads", type=int)
    s.add_argument("--hash", type=int, help="hash size in MB")
    s.add_argument("--time-limit", type=_positive_float, help="seconds per position")
    s.add_argument("--pool", type=int, default=1)
    s.set_defaults(func=cmd_annotate)

    s = sub.add_parser("analyze", help="per-player metrics for every game")
    s.add_argument("input", help="games dataset or PGN file")
    s.add_argument("-o", "--output", required=True, help="metrics dataset")
    s.add_argument("--csv", help="also write a per-player CSV export")
    s.add_argument("--model", dest="wdl_model", choices=("engine", "human"), default="engine")
    s.add_argument("--es-w", type=float, help="fixed White expected score for the human model")
    s.add_argument("--es-b", type=float)
    s.add_argument("--logistic-k", dest="wdl_k", type=_positive_float, default=LOGISTIC_K)
    s.add_argument("--mate-cap", dest="wdl_mate_cap", type=int, default=MATE_CAP)
    s.add_argument("--cp-cap", dest="wdl_cp_cap", type=int, default=CP_CAP)
    s.add_argument("--draw-max", dest="wdl_draw_d_max", type=float, default=DRAW_MAX)
    s.add_argument("--draw-tau", dest="wdl_draw_tau", type=_positive_float, default=DRAW_TAU)
    s.add_argument("--win", type=float, default=1.0)
    s.add_argument("--draw", type=float, default=0.5)
    s.add_argument("--loss", type=float, default=0.0)
    s.add_argument("--root-eval", default="0.00", help="evaluation before move 1, PGN style")
    s.add_argument("--gap-policy", choices=("error", "skip"), default="error")
    s.add_argument("--skip-opening", type=int, default=0, help="ignore the first N full moves")
    s.add_argument("--accuracy-skip-lost", action="store_true")
    s.add_argument("--unfinished", choices=("egi", "skip"), default="egi")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("report", help="summary table per player")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.add_argument("--stat", choices=("mean", "median"), default="mean")
    s.add_argument("--group", default="player", help="comma-separated: " + ",".join(GROUP_KEYS))
    s.add_argument("--format", choices=("csv", "md"), default="md")
    s.set_defaults(func=cmd_report)

    s = sub.add_parser("compare", help="pairwise one-sided Mann-Whitney matrix")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.add_argument("--players", help="comma-separated, in display order")
    s.add_argument("--color", choices=("white", "black"))
    s.add_argument("--alternative", choices=("greater", "less"), default="greater")
    s.add_argument("--method", choices=("auto", "exact", "normal"), default="auto")
    s.add_argument("--format", choices=("csv", "text"), default="text")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("tpr", help="tournament performance ratings")
    s.add_argument("input", help="results CSV (player,opponent_rating,score) or metrics dataset")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_tpr)

    s = sub.add_parser("hist", help="histogram data as CSV")
    s.add_argument("input")
    s.add_argument("-o", "--output")
    s.add_argument("--player")
    s.add_argument("--color", choices=("white", "black"))
    s.add_argument("--metric", choices=("gi", "gpl", "egi", "accuracy"), default="gi")
    s.add_argument("--width", type=_positive_float, default=0.25)
    s.set_defaults(func=cmd_hist)

    s = sub.add_parser("lab", help="property checks on random synthetic games")
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--games", type=int, default=100)
    s.add_argument("--depth", type=int, default=4)
    s.add_argument("--branch", type=int, default=3)
    s.add_argument("--mechanism", default="gi", help="gi | gpl-only | reward-only | linear:a,b,d")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_lab)
    return p


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[name]
    raise KeyError(name)


def _known_keys(parser: argparse.ArgumentParser) -> set:
    keys = set()
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            for sp in a.choices.values():
                keys |= {x.dest for x in sp._actions}
    return keys


def _error(command: Optional[str], exc: BaseException) -> int:
    summary = {"command": command, "error": type(exc).__name__, "message": str(exc)}
    sys.stderr.write("error: " + json.dumps(summary, sort_keys=True) + "\n")
    return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            _require_file(args.config)
            values = load_config(args.config)
            unknown = sorted(set(values) - _known_keys(parser))
            if unknown:
                raise CliError(f"unknown config keys {unknown}")
            sp = _subparser(parser, args.command)
            sp.set_defaults(**_coerce(sp, values))
            args = parser.parse_args(argv)
        return args.func(args)
    except (CliError, SchemaError, GameParseError, EngineError, OSError, ValueError, KeyError) as exc:
        return _error(args.command, exc)


if __name__ == "__main__":
    sys.exit(main())
