#!/usr/bin/env python3
"""Synthetic price panel for the capital-charge tests, and a brute-force
reference calculation of the charge.

    python3 scripts/basel_fixture.py generate OUTDIR
    python3 scripts/basel_fixture.py oracle OUTDIR

`generate` writes one CSV per factor plus config.toml. `oracle` reads the
CSVs back and writes golden.json. The oracle re-sorts every window from
scratch and shares no code with the library.
"""

import csv
import datetime as dt
import json
import math
import sys
try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib
from pathlib import Path

FACTORS = ["equity_a", "equity_b", "rates_a", "fx_a"]
UNITS = [100.0, 50.0, 200.0, 1000.0]
VOLS = [0.012, 0.015, 0.004, 0.006]
N_PRICES = 2530
STRESS = (700, 950)

CONFIG = """\
[data]
dir = "."
factors = ["equity_a", "equity_b", "rates_a", "fx_a"]
units = [100.0, 50.0, 200.0, 1000.0]
date_column = "date"
value_column = "close"

[basel]
p = 0.975
lambda = 0.5
current_window = 250
lookback_windows = 2251
reduced_set = ["equity_a", "rates_a", "fx_a"]

[[basel.risk_classes]]
name = "equity"
factors = ["equity_a", "equity_b"]

[[basel.risk_classes]]
name = "rates"
factors = ["rates_a"]

[[basel.risk_classes]]
name = "fx"
factors = ["fx_a"]
"""


def business_days(start, n):
    out = []
    d = start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def generate(outdir):
    import numpy as np

    rng = np.random.default_rng(20240601)
    dates = business_days(dt.date(2014, 1, 1), N_PRICES)
    common = rng.standard_normal(N_PRICES)
    prices = []
    for i, vol in enumerate(VOLS):
        idio = rng.standard_normal(N_PRICES)
        scale = np.full(N_PRICES, vol)
        scale[STRESS[0]:STRESS[1]] *= 3.0
        beta = 0.6 if i < 2 else 0.3
        r = scale * (beta * common + math.sqrt(1 - beta * beta) * idio)
        r[0] = 0.0
        prices.append(100.0 * np.exp(np.cumsum(r)))
    outdir.mkdir(parents=True, exist_ok=True)
    for name, p in zip(FACTORS, prices):
        with open(outdir / f"{name}.csv", "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["date", "close"])
            for d, v in zip(dates, p):
                w.writerow([d.isoformat(), "%.10g" % v])
    (outdir / "config.toml").write_text(CONFIG)


def read_prices(path):
    rows = []
    with open(path) as f:
        for rec in csv.DictReader(f):
            rows.append((dt.date.fromisoformat(rec["date"]), float(rec["close"])))
    rows.sort()
    return rows


def es_uniform(samples, p):
    # ES of the uniform law on the samples: average of the left-continuous
    # quantile over (p, 1]
    xs = sorted(samples)
    n = len(xs)
    parts = []
    for k in range(1, n + 1):
        lo = max((k - 1) / n, p)
        hi = 1.0 if k == n else k / n
        if hi > lo:
            parts.append((hi - lo) * xs[k - 1])
    return math.fsum(parts) / (1.0 - p)


def oracle(outdir):
    cfg = tomllib.loads((outdir / "config.toml").read_text())
    data, basel = cfg["data"], cfg["basel"]
    names = data["factors"]
    units = data["units"]
    series = [dict(read_prices(outdir / f"{n}.csv")) for n in names]
    dates = sorted(set.intersection(*(set(s) for s in series)))
    # row t (t >= 1 in the price index) holds X_t and exposure units * P_{t-1}
    rows = []
    for t in range(1, len(dates)):
        # -(P_t / P_{t-1} - 1), written so the subtraction is exact
        ret = [(s[dates[t - 1]] - s[dates[t]]) / s[dates[t - 1]] for s in series]
        exp = [u * s[dates[t - 1]] for u, s in zip(units, series)]
        rows.append((dates[t], ret, exp))
    t = len(rows) - 1
    as_of, _, exposure = rows[t]
    p = basel["p"]
    w = basel["current_window"]
    n_windows = basel["lookback_windows"]
    lam = basel["lambda"]
    reduced = set(basel["reduced_set"])

    def loss(s, members):
        total = 0.0
        for i in range(len(names)):
            if names[i] in members:
                total += rows[s][1][i] * exposure[i]
        return total

    def window_es(j, members):
        return es_uniform([loss(s, members) for s in range(t - j - w + 1, t - j + 1)], p)

    def stress_adjusted(full):
        red = full & reduced
        es_f = window_es(1, full)
        theta = 1.0 if red == full else max(es_f / window_es(1, red), 1.0)
        best_j, best = None, -math.inf
        for j in range(n_windows, 0, -1):
            v = window_es(j, red)
            if v > best:
                best_j, best = j, v
        return best * theta, best, theta, best_j

    es_tilde, es_rs, theta, best_j = stress_adjusted(set(names))
    per_class = {}
    for c in basel["risk_classes"]:
        per_class[c["name"]] = stress_adjusted(set(c["factors"]))[0]
    es_c = sum(per_class[c["name"]] for c in basel["risk_classes"])
    imcc = lam * es_tilde + (1 - lam) * es_c
    golden = {
        "as_of": as_of.isoformat(),
        "imcc": "%.10g" % imcc,
        "es_tilde": "%.10g" % es_tilde,
        "es_c": "%.10g" % es_c,
        "es_rs": "%.10g" % es_rs,
        "theta": "%.10g" % theta,
        "argmax_offset": best_j,
        "argmax_start": rows[t - best_j - w + 1][0].isoformat(),
        "argmax_end": rows[t - best_j][0].isoformat(),
        "per_class": {k: "%.10g" % v for k, v in per_class.items()},
    }
    (outdir / "golden.json").write_text(json.dumps(golden, indent=2) + "\n")


if __name__ == "__main__":
    cmd, out = sys.argv[1], Path(sys.argv[2])
    {"generate": generate, "oracle": oracle}[cmd](out)
