"""Rebuild oracle_metrics.csv from hand-entered evaluations.

Independent of the package: evaluations are typed in below, the expected
score is computed with mpmath at 30 digits, and mate scores use the
1500 - |n| rule. Run: python make_oracle.py > oracle_metrics.csv
and python make_oracle.py --twenty > twenty_oracle.csv
"""

import csv
import sys

from mpmath import exp, mp, mpf

mp.dps = 30
K = mpf("0.00368208")
WIN = "WIN"  # the move delivered mate; the mover's value is a certain win

GAMES = [
    # (index, white, black, white reward, evals after each ply, White's side, centipawns)
    (1, "Alpha", "Beta", 1, [25, 30, -20, -15, -40, 60, 55, 70, 40, 120, 128, 150]),
    (2, "Beta", "Gamma", mpf("0.5"), [15, 20, 35, 30, 25, 10, 1496, 40, 30, 30]),
    (3, "Gamma", "Alpha", 1, [30, 25, 20, 30, 15, 1499, WIN]),
]

# twenty_ply.pgn
TWENTY = [
    (1, "Delta", "Epsilon", mpf("0.5"),
     [31, 29, 25, 33, 21, 37, 30, 36, 12, 18, 15, 22, 10, 24, 20, 26, -5, 45, 41, 40]),
]


def es(c):
    return 1 / (1 + exp(-K * c))


def mover_value(ev, white):
    if ev == WIN:
        return mpf(1)
    return es(ev if white else -ev)


def metrics(evals):
    out = {True: [], False: []}
    before = 0
    for k, ev in enumerate(evals):
        white = k % 2 == 0
        out[white].append((mover_value(before, white), mover_value(ev, white)))
        before = ev
    return out


def main():
    games = TWENTY if sys.argv[1:] == ["--twenty"] else GAMES
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["index", "player", "color", "reward", "gpl", "gi", "egi", "accuracy", "moves"])
    for index, white, black, r_white, evals in games:
        pairs = metrics(evals)
        for is_white, name, r in ((True, white, r_white), (False, black, 1 - r_white)):
            ps = pairs[is_white]
            g = sum(b - p for b, p in ps)
            acc = sum(p / b for b, p in ps) / len(ps)
            egi = ps[-1][1] - g
            w.writerow([index, name, "white" if is_white else "black", mp.nstr(mpf(r), 20),
                        mp.nstr(g, 20), mp.nstr(r - g, 20), mp.nstr(egi, 20), mp.nstr(acc, 20), len(ps)])


if __name__ == "__main__":
    main()
