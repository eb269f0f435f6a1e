"""Synthetic stand-in for the extended coronary angiography table.

The real export must be obtained manually; this generator emits a CSV with
the same 59-column layout, the same row and class counts, a constant
"Exertional CP" column, and class-conditional feature distributions whose
difficulty is in the same regime as the clinical source (angiography columns
agree with the label most but not all of the time). Intended for tests and
demos; results on it are not results on the clinical dataset.

Usage: python -m cadpipe.synthetic --out replica.csv [--seed 20240501]
"""

from __future__ import annotations

import argparse
import csv
import io
from pathlib import Path

import numpy as np

from .rng import Prng

DEFAULT_SEED = 20240501
N_ROWS = 303
N_POSITIVE = 216

# Label inconsistency of the angiography columns: the fraction of CAD rows
# whose three artery columns all read Normal, and the per-artery chance of a
# Stenotic reading in a non-CAD row. These two knobs set the irreducible
# error and were chosen so the full pipeline lands in the accuracy regime
# reported for the clinical source.
CAD_ALL_CLEAR_RATE = 0.18
NORMAL_STENOTIC_RATE = 0.09

# (name, intercept, risk_slope) for Bernoulli features driven by the latent
# risk score; probability = sigmoid(intercept + slope * risk). Probabilities
# sit mostly in the 0.2-0.7 band: ~30 mid-entropy, largely independent bits
# do not fit through a 32-wide bottleneck, which keeps the autoencoder's
# reconstructions blurry the way a real mixed clinical table does.
_BINARY_RATES = [
    ("Sex", 0.35, 0.15),  # Male
    ("DM", -0.70, 0.45),
    ("HTN", -0.30, 0.45),
    ("Current Smoker", -0.80, 0.40),
    ("EX-Smoker", -1.10, 0.15),
    ("FH", -0.90, 0.30),
    ("Obesity", 0.55, 0.05),
    ("CRF", -1.80, 0.25),
    ("CVA", -1.90, 0.15),
    ("Airway disease", -1.60, 0.05),
    ("Thyroid Disease", -1.60, 0.05),
    ("CHF", -1.90, 0.30),
    ("DLP", -0.35, 0.40),
    ("Edema", -1.40, 0.30),
    ("Weak Peripheral Pulse", -1.60, 0.30),
    ("Lung rales", -1.70, 0.25),
    ("Systolic Murmur", -1.10, 0.25),
    ("Diastolic Murmur", -1.80, 0.20),
    ("Typical Chest Pain", -0.75, 1.05),
    ("Dyspnea", -0.50, 0.25),
    ("Atypical", -0.35, -0.80),
    ("Nonanginal", -1.20, -0.60),
    ("LowTH Ang", -1.90, 0.25),
    ("Q Wave", -1.70, 0.55),
    ("St Elevation", -1.80, 0.55),
    ("St Depression", -1.30, 0.55),
    ("Tinversion", -1.10, 0.55),
    ("LVH", -1.30, 0.30),
    ("Poor R Progression", -1.60, 0.40),
]

_BINARY_LEVELS = {
    "Sex": ("Fmale", "Male"),
    "Obesity": ("N", "Y"),
    "CRF": ("N", "Y"),
    "CVA": ("N", "Y"),
    "Airway disease": ("N", "Y"),
    "Thyroid Disease": ("N", "Y"),
    "CHF": ("N", "Y"),
    "DLP": ("N", "Y"),
    "Weak Peripheral Pulse": ("N", "Y"),
    "Lung rales": ("N", "Y"),
    "Systolic Murmur": ("N", "Y"),
    "Diastolic Murmur": ("N", "Y"),
    "Dyspnea": ("N", "Y"),
    "Atypical": ("N", "Y"),
    "Nonanginal": ("N", "Y"),
    "LowTH Ang": ("N", "Y"),
    "LVH": ("N", "Y"),
    "Poor R Progression": ("N", "Y"),
}

HEADER = [
    "Age", "Weight", "Length", "Sex", "BMI", "DM", "HTN", "Current Smoker",
    "EX-Smoker", "FH", "Obesity", "CRF", "CVA", "Airway disease",
    "Thyroid Disease", "CHF", "DLP", "BP", "PR", "Edema",
    "Weak Peripheral Pulse", "Lung rales", "Systolic Murmur",
    "Diastolic Murmur", "Typical Chest Pain", "Dyspnea", "Function Class",
    "Atypical", "Nonanginal", "Exertional CP", "LowTH Ang", "Q Wave",
    "St Elevation", "St Depression", "Tinversion", "LVH",
    "Poor R Progression", "BBB", "FBS", "CR", "TG", "LDL", "HDL", "BUN",
    "ESR", "HB", "K", "Na", "WBC", "Lymph", "Neut", "PLT", "EF-TTE",
    "Region RWMA", "VHD", "LAD", "LCX", "RCA", "Cath",
]


def _sigmoid(z: float) -> float:
    return 1.0 / (1.0 + np.exp(-z))


def _normal(rng: Prng, mean: float, std: float) -> float:
    # Box-Muller on the documented uniform stream keeps Prng's surface small.
    u1 = max(rng.uniform(), 1e-12)
    u2 = rng.uniform()
    return mean + std * float(np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2))


def _ordinal(rng: Prng, risk: float, cuts: list[float]) -> int:
    """Latent risk + noise thresholded at `cuts` gives an ordinal level."""
    z = risk + _normal(rng, 0.0, 1.0)
    level = 0
    for cut in cuts:
        if z > cut:
            level += 1
    return level


def _row(rng: Prng, cad: bool) -> dict[str, str]:
    risk = _normal(rng, 1.0 if cad else -1.0, 0.9)
    row: dict[str, str] = {}

    age = np.clip(_normal(rng, 58 + 4.0 * risk, 9.0), 30, 86)
    length = np.clip(_normal(rng, 165, 9.0), 140, 195)
    weight = np.clip(_normal(rng, 74, 11.0), 45, 120)
    bmi = weight / (length / 100.0) ** 2
    row["Age"] = str(int(round(age)))
    row["Length"] = str(int(round(length)))
    row["Weight"] = str(int(round(weight)))
    row["BMI"] = f"{bmi:.2f}"

    for name, intercept, slope in _BINARY_RATES:
        hit = rng.uniform() < _sigmoid(intercept + slope * risk)
        neg, pos = _BINARY_LEVELS.get(name, ("0", "1"))
        row[name] = pos if hit else neg

    row["Exertional CP"] = "N"  # constant in the source data, removed by cleaning

    row["BP"] = str(int(round(np.clip(_normal(rng, 128 + 4.0 * risk, 17.0), 90, 210))))
    row["PR"] = str(int(round(np.clip(_normal(rng, 74 + 2.0 * risk, 9.0), 50, 110))))
    row["Function Class"] = str(_ordinal(rng, 0.50 * risk, [0.6, 1.5, 2.4]))
    row["BBB"] = ("N", "LBBB", "RBBB")[min(_ordinal(rng, 0.2 * risk, [1.2, 1.9]), 2)]

    row["FBS"] = str(int(round(np.clip(_normal(rng, 110 + 9.0 * risk, 45.0), 60, 400))))
    row["CR"] = f"{np.clip(_normal(rng, 1.06 + 0.04 * risk, 0.22), 0.5, 2.8):.1f}"
    row["TG"] = str(int(round(np.clip(_normal(rng, 160 + 12.0 * risk, 95.0), 40, 600))))
    row["LDL"] = str(int(round(np.clip(_normal(rng, 105 + 6.0 * risk, 40.0), 30, 250))))
    row["HDL"] = str(int(round(np.clip(_normal(rng, 41 - 2.0 * risk, 9.0), 15, 90))))
    row["BUN"] = str(int(round(np.clip(_normal(rng, 17.5 + 1.0 * risk, 6.5), 5, 60))))
    row["ESR"] = str(int(round(np.clip(_normal(rng, 22 + 4.0 * risk, 18.0), 1, 90))))
    row["HB"] = f"{np.clip(_normal(rng, 13.9 - 0.2 * risk, 1.5), 8.5, 18.5):.1f}"
    row["K"] = f"{np.clip(_normal(rng, 4.25, 0.42), 3.0, 6.5):.1f}"
    row["Na"] = str(int(round(np.clip(_normal(rng, 141, 3.5), 128, 155))))
    row["WBC"] = str(int(round(np.clip(_normal(rng, 7600 + 300.0 * risk, 2600.0), 3000, 18000))))
    row["Lymph"] = str(int(round(np.clip(_normal(rng, 34 - 1.5 * risk, 9.5), 7, 60))))
    row["Neut"] = str(int(round(np.clip(_normal(rng, 59 + 1.5 * risk, 9.5), 30, 90))))
    row["PLT"] = str(int(round(np.clip(_normal(rng, 236, 57.0), 90, 600))))
    row["EF-TTE"] = str(int(round(np.clip(_normal(rng, 48 - 2.6 * risk, 9.0), 15, 60))))
    row["Region RWMA"] = str(_ordinal(rng, 0.55 * max(risk, 0.0) - 0.3, [1.0, 1.6, 2.2, 2.8]))
    row["VHD"] = ("N", "mild", "Moderate", "Severe")[
        min(_ordinal(rng, 0.3 * risk, [0.55, 1.7, 2.8]), 3)
    ]

    arteries = {"LAD": False, "LCX": False, "RCA": False}
    if cad:
        if rng.uniform() >= CAD_ALL_CLEAR_RATE:
            arteries["LAD"] = rng.uniform() < 0.68
            arteries["LCX"] = rng.uniform() < 0.42
            arteries["RCA"] = rng.uniform() < 0.42
            if not any(arteries.values()):
                arteries["LAD"] = True
    else:
        for artery in arteries:
            arteries[artery] = rng.uniform() < NORMAL_STENOTIC_RATE
    for artery, stenotic in arteries.items():
        row[artery] = "Stenotic" if stenotic else "Normal"

    row["Cath"] = "Cad" if cad else "Normal"
    return row


def generate(seed: int = DEFAULT_SEED, n_rows: int = N_ROWS,
             n_positive: int = N_POSITIVE) -> str:
    """CSV text for a synthetic table with the published layout and counts."""
    if not 0 < n_positive < n_rows:
        raise ValueError("need at least one row of each class")
    rng = Prng(seed)
    labels = np.zeros(n_rows, dtype=bool)
    labels[rng.subset(n_rows, n_positive)] = True
    rows = [_row(rng, bool(cad)) for cad in labels]
    _ensure_column_diversity(rows)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for row in rows:
        writer.writerow([row[name] for name in HEADER])
    return out.getvalue()


def _ensure_column_diversity(rows: list[dict[str, str]]) -> None:
    """Guarantee every column except 'Exertional CP' has >= 2 distinct
    values, so cleaning removes exactly the intended column."""
    for j, name in enumerate(HEADER):
        if name in ("Exertional CP", "Cath"):
            continue
        values = {row[name] for row in rows}
        if len(values) >= 2:
            continue
        target = rows[j % len(rows)]
        if name in _BINARY_LEVELS or name in ("LAD", "LCX", "RCA"):
            neg, pos = _BINARY_LEVELS.get(name, ("Normal", "Stenotic"))
            target[name] = pos if target[name] == neg else neg
        else:
            target[name] = str(float(target[name]) + 1.0)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Write a synthetic replica of the 59-column angiography table."
    )
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--rows", type=int, default=N_ROWS)
    parser.add_argument("--positive", type=int, default=N_POSITIVE)
    args = parser.parse_args(argv)
    Path(args.out).write_text(
        generate(args.seed, args.rows, args.positive), encoding="utf-8"
    )
    print(f"wrote {args.rows} rows ({args.positive} positive) to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
