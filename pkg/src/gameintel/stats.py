"""Summary tables, one-sided Mann-Whitney comparisons and histograms."""

from __future__ import annotations

import csv
import io
import itertools
import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .metrics import PlayerGameMetrics

EXACT_MAX_N = 10


class EmptySampleError(ValueError):
    pass


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks with ties sharing the mean of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def u_statistic(a: Sequence[float], b: Sequence[float]) -> float:
    """U for sample ``a``: pairs with a > b plus half the ties."""
    ranks = midranks(list(a) + list(b))
    n_a = len(a)
    return math.fsum(ranks[:n_a]) - n_a * (n_a + 1) / 2


def _exact_p(a, b, alternative) -> float:
    pooled = list(a) + list(b)
    ranks = midranks(pooled)
    n, n_a = len(pooled), len(a)
    offset = n_a * (n_a + 1) / 2
    u_obs = math.fsum(ranks[:n_a]) - offset
    hits = total = 0
    for idx in itertools.combinations(range(n), n_a):
        u = math.fsum(ranks[i] for i in idx) - offset
        total += 1
        if alternative == "greater" and u >= u_obs - 1e-9:
            hits += 1
        elif alternative == "less" and u <= u_obs + 1e-9:
            hits += 1
    return hits / total


def _normal_p(a, b, alternative) -> float:
    pooled = list(a) + list(b)
    n_a, n_b = len(a), len(b)
    n = n_a + n_b
    u = u_statistic(a, b)
    mu = n_a * n_b / 2
    counts: dict = {}
    for v in pooled:
        counts[v] = counts.get(v, 0) + 1
    tie_term = sum(t ** 3 - t for t in counts.values())
    var = n_a * n_b / 12 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return 1.0
    sd = math.sqrt(var)
    if alternative == "greater":
        z = (u - mu - 0.5) / sd
    else:
        z = (mu - u - 0.5) / sd
    return 0.5 * math.erfc(z / math.sqrt(2))


def mann_whitney_one_sided(
    a: Sequence[float],
    b: Sequence[float],
    alternative: str = "greater",
    method: str = "auto",
) -> tuple[float, float]:
    """Return ``(U_a, p)`` for H1: ``a`` tends to be greater (or less) than ``b``.

    ``method`` is ``auto``, ``exact`` or ``normal``. ``auto`` enumerates every
    split of the pooled ranks when the pooled size is at most 10 and uses the
    tie-corrected normal approximation with a 0.5 continuity correction
    otherwise. Exact enumeration keeps midranks, so it stays valid with ties.
    """
    if not a or not b:
        raise EmptySampleError("both samples must be nonempty")
    if alternative not in ("greater", "less"):
        raise ValueError(f"alternative must be 'greater' or 'less', not {alternative!r}")
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    u = u_statistic(a, b)
    exact = method == "exact" or (method == "auto" and len(a) + len(b) <= EXACT_MAX_N)
    p = _exact_p(a, b, alternative) if exact else _normal_p(a, b, alternative)
    return u, min(1.0, max(0.0, p))


# --- summary tables -------------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    player: str
    gi: float
    gi_sd: float
    gi_w: Optional[float]
    gi_b: Optional[float]
    gpl: float
    gpl_w: Optional[float]
    gpl_b: Optional[float]
    reward: float
    games: int
    games_w: int
    games_b: int
    moves: int


def _center(values, stat):
    if not values:
        return None
    return math.fsum(values) / len(values) if stat == "mean" else statistics.median(values)


def summarize(
    metrics: Iterable[tuple[str, PlayerGameMetrics]] | Iterable[PlayerGameMetrics],
    stat: str = "mean",
) -> list[SummaryRow]:
    """Per-group summary rows sorted by descending GI, then group name.

    ``metrics`` holds either bare :class:`PlayerGameMetrics` (grouped by
    player) or ``(group_key, metrics)`` pairs. Games without a GI are ignored.
    """
    if stat not in ("mean", "median"):
        raise ValueError(f"stat must be 'mean' or 'median', not {stat!r}")
    groups: dict[str, list[PlayerGameMetrics]] = {}
    for item in metrics:
        key, m = item if isinstance(item, tuple) else (item.player_id, item)
        if m.gi is None:
            continue
        groups.setdefault(key, []).append(m)
    rows = []
    for key, ms in groups.items():
        gis = [m.gi for m in ms]
        white = [m for m in ms if m.color == "white"]
        black = [m for m in ms if m.color == "black"]
        rows.append(SummaryRow(
            player=key,
            gi=_center(gis, stat),
            gi_sd=statistics.stdev(gis) if len(gis) > 1 else 0.0,
            gi_w=_center([m.gi for m in white], stat),
            gi_b=_center([m.gi for m in black], stat),
            gpl=_center([m.gpl for m in ms], stat),
            gpl_w=_center([m.gpl for m in white], stat),
            gpl_b=_center([m.gpl for m in black], stat),
            reward=_center([m.reward for m in ms], stat),
            games=len(ms),
            games_w=len(white),
            games_b=len(black),
            moves=sum(m.move_count for m in ms),
        ))
    rows.sort(key=lambda r: (-r.gi, r.player))
    return rows


MEAN_COLUMNS = ("Player", "GI", "SD", "GI_W", "GI_B", "GPL", "GPL_W", "GPL_B", "Games", "Moves")
MEDIAN_COLUMNS = ("Player", "GI", "GI_W", "GI_B", "GPL", "GPL_W", "GPL_B", "Games", "Moves")


def _row_values(r: SummaryRow, stat: str) -> list:
    vals = [r.player, r.gi]
    if stat == "mean":
        vals.append(r.gi_sd)
    vals += [r.gi_w, r.gi_b, r.gpl, r.gpl_w, r.gpl_b, r.games, r.moves]
    return vals


def _fmt(v, digits: Optional[int]) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if digits is None:
            return repr(v)
        s = f"{v:.{digits}f}"
        return "0.00" if s == "-0.00" else s
    return str(v)


def _header_lines(comments: Sequence[str], prefix: str) -> str:
    return "".join(f"{prefix}{c}\n" for c in comments)


def summary_csv(rows: Sequence[SummaryRow], stat: str = "mean", comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(_header_lines(comments, "# "))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MEAN_COLUMNS if stat == "mean" else MEDIAN_COLUMNS)
    for r in rows:
        w.writerow([_fmt(v, None) for v in _row_values(r, stat)])
    return buf.getvalue()


def summary_markdown(rows: Sequence[SummaryRow], stat: str = "mean", comments: Sequence[str] = ()) -> str:
    cols = MEAN_COLUMNS if stat == "mean" else MEDIAN_COLUMNS
    out = [_header_lines(comments, "<!-- ").replace("\n", " -->\n")]
    out.append("| " + " | ".join(cols) + " |\n")
    out.append("|" + "|".join("---" if c == "Player" else "---:" for c in cols) + "|\n")
    for r in rows:
        out.append("| " + " | ".join(_fmt(v, 2) for v in _row_values(r, stat)) + " |\n")
    return "".join(out)


# --- comparison matrices --------------------------------------------------

@dataclass(frozen=True)
class ComparisonCell:
    row: str
    col: str
    metric: str
    u: float
    p: float
    color: Optional[str] = None


def orientation_note(alternative: str) -> str:
    rel = ">" if alternative == "greater" else "<"
    return (
        f"one-sided Mann-Whitney U; H0: row and column scores identically distributed; "
        f"H1: row {rel} column; upper triangle GI, lower triangle GPL"
    )


def comparison_matrix(
    samples: dict[str, Sequence[PlayerGameMetrics]],
    players: Optional[Sequence[str]] = None,
    color: Optional[str] = None,
    alternative: str = "greater",
    method: str = "auto",
) -> list[list[Optional[ComparisonCell]]]:
    """Grid of one-sided tests; cell (i, j) tests player i against player j.

    Above the diagonal the GI samples are compared, below it the GPL samples.
    ``color`` restricts both samples to games played with that colour.
    """
    order = list(players) if players is not None else sorted(samples)
    missing = [p for p in order if p not in samples]
    if missing:
        raise KeyError(f"no metrics for players {missing}")

    def values(player, metric):
        return [getattr(m, metric) for m in samples[player]
                if (color is None or m.color == color) and getattr(m, metric) is not None]

    grid: list[list[Optional[ComparisonCell]]] = []
    for i, rp in enumerate(order):
        row = []
        for j, cp in enumerate(order):
            if i == j:
                row.append(None)
                continue
            metric = "gi" if j > i else "gpl"
            a, b = values(rp, metric), values(cp, metric)
            if not a or not b:
                row.append(None)
                continue
            u, p = mann_whitney_one_sided(a, b, alternative, method)
            row.append(ComparisonCell(rp, cp, metric, u, p, color))
        grid.append(row)
    return grid


def matrix_csv(grid, players: Sequence[str], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(_header_lines(comments, "# "))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["", *players])
    for name, row in zip(players, grid):
        w.writerow([name, *("" if c is None else repr(c.p) for c in row)])
    return buf.getvalue()


def matrix_text(grid, players: Sequence[str], comments: Sequence[str] = (), digits: int = 2) -> str:
    cells = [["", *players]]
    for name, row in zip(players, grid):
        cells.append([name, *("-" if c is None else f"{c.p:.{digits}f}" for c in row)])
    widths = [max(len(r[k]) for r in cells) for k in range(len(cells[0]))]
    lines = [_header_lines(comments, "# ").rstrip("\n")] if comments else []
    for r in cells:
        lines.append("  ".join(
            v.ljust(widths[k]) if k == 0 else v.rjust(widths[k]) for k, v in enumerate(r)
        ).rstrip())
    return "\n".join(lines) + "\n"


# --- histograms -----------------------------------------------------------

def histogram(values: Sequence[float], width: float) -> tuple[list[float], list[int]]:
    """Bins ``[lo + k*width, lo + (k+1)*width)`` aligned to multiples of ``width``.

    Returns ``(edges, counts)`` with ``len(edges) == len(counts) + 1``; an
    empty input gives two empty lists.
    """
    if not width > 0 or not math.isfinite(width):
        raise ValueError("bin width must be positive")
    vals = list(values)
    if not vals:
        return [], []
    lo_k = math.floor(min(vals) / width)
    hi_k = math.floor(max(vals) / width)
    counts = [0] * (hi_k - lo_k + 1)
    for v in vals:
        counts[math.floor(v / width) - lo_k] += 1
    edges = [round((lo_k + i) * width, 12) for i in range(len(counts) + 1)]
    return edges, counts


def histogram_csv(edges: Sequence[float], counts: Sequence[int], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(_header_lines(comments, "# "))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi", "count"])
    for i, c in enumerate(counts):
        w.writerow([repr(float(edges[i])), repr(float(edges[i + 1])), c])
    return buf.getvalue()
