#!/usr/bin/env python3
"""Builds the bundled synthetic benchmark fixture and the naive prior.

Both files are synthetic. They mimic the layout of a normalized national
mobility survey aggregate (marginals plus walking preference by age group)
but carry no real survey data. Every block is checked to sum to 100.0
percent before it is written; the script prints the sums it verified.
"""
import argparse
import math
import sys
from pathlib import Path

AGE = ["14--17", "18--29", "30--39", "40--49", "50--59", "60--64", "65--74", "75--79", "80+"]
EDUCATION = ["No Degree (yet)", "Low", "Medium", "High"]
ACTIVITY = ["Full-time employee", "Part-time employee", "Employed (unspecified)", "Pupil",
            "Student", "Housewife/Househusband", "Pensioner", "Other"]
ECONOMIC = ["Very Low", "Low", "Medium", "High", "Very High"]
HOUSEHOLD = ["Young singles", "Middle-aged singles", "Older singles", "Young two-person households",
             "Middle-aged two-person households", "Older two-person households",
             "Households with at least 3 adults", "Households with at least 1 child under 6",
             "Households with at least 1 child under 14", "Households with at least 1 child under 18",
             "Single parents"]
RESPONSES = ["Completely Agree", "Rather Agree", "Partly Agree", "Rather Disagree", "Completely Disagree"]
NOT_SPECIFIED = "not specified"

# Benchmark marginals in percent; "not specified" entries exercise the merge path.
BENCHMARK_MARGINALS = {
    "Age Group": dict(zip(AGE, [4.6, 16.1, 14.2, 15.3, 17.4, 7.2, 12.0, 6.9, 6.3])),
    "Education Level": {**dict(zip(EDUCATION, [8.1, 30.2, 33.5, 27.4])), NOT_SPECIFIED: 0.8},
    "Main Activity": {**dict(zip(ACTIVITY, [33.0, 12.4, 3.1, 6.2, 4.3, 3.4, 31.8, 5.2])), NOT_SPECIFIED: 0.6},
    "Economic Status": dict(zip(ECONOMIC, [6.8, 17.9, 42.6, 25.1, 7.6])),
    "Household Type": {**dict(zip(HOUSEHOLD, [5.2, 8.4, 10.1, 4.3, 10.6, 18.7, 17.5, 9.4, 7.0, 5.3, 3.1])),
                       NOT_SPECIFIED: 0.4},
}

# Deliberately coarse "general knowledge" prior for the naive tiers.
NAIVE_PRIOR = {
    "Age Group": dict(zip(AGE, [5.0, 15.0, 15.0, 15.0, 15.0, 8.0, 13.0, 7.0, 7.0])),
    "Education Level": dict(zip(EDUCATION, [10.0, 30.0, 35.0, 25.0])),
    "Main Activity": dict(zip(ACTIVITY, [35.0, 10.0, 5.0, 7.0, 5.0, 5.0, 28.0, 5.0])),
    "Economic Status": dict(zip(ECONOMIC, [10.0, 20.0, 40.0, 20.0, 10.0])),
    "Household Type": dict(zip(HOUSEHOLD, [6.0, 8.0, 9.0, 5.0, 10.0, 17.0, 16.0, 9.0, 8.0, 7.0, 5.0])),
}


def round_to_total(values, total=100.0, digits=1):
    """Rounds to `digits` decimals and fixes the residual on the largest entry."""
    scale = 10 ** digits
    ints = [round(v * scale) for v in values]
    residual = round(total * scale) - sum(ints)
    ints[max(range(len(ints)), key=lambda i: ints[i])] += residual
    return [i / scale for i in ints]


def walking_by_age():
    """Smooth age profile: agreement rises with age, with a small not-specified share."""
    rows = {}
    for idx, age in enumerate(AGE):
        t = idx / (len(AGE) - 1)
        logits = [0.55 + 0.9 * t, 0.75 + 0.1 * t, 0.35 - 0.2 * t, -0.35 - 0.5 * t, -1.0 - 0.6 * t]
        weights = [math.exp(v) for v in logits]
        ns = 1.0 + 1.5 * t
        z = sum(weights)
        shares = [(100.0 - ns) * w / z for w in weights] + [ns]
        rows[age] = dict(zip(RESPONSES + [NOT_SPECIFIED], round_to_total(shares)))
    return rows


def check(block, name):
    s = round(sum(block.values()), 6)
    if abs(s - 100.0) > 1e-9:
        sys.exit(f"{name}: shares sum to {s}, expected 100")
    print(f"{name}: sum={s:.1f} over {len(block)} entries")


def write_marginals(out, marginals, label):
    for attr, block in marginals.items():
        check(block, f"{label}/{attr}")
        for cat, share in block.items():
            out.append(f"marginal,{attr},{cat},,,{share:.1f}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default=str(Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    root = Path(args.out_dir)

    header = "kind,attribute,category,question,response,share_percent"
    lines = ["# SYNTHETIC benchmark fixture. Not real survey data.",
             "# Layout mimics a normalized mobility-survey aggregate; regenerate with scripts/make_fixture.py.",
             header]
    write_marginals(lines, BENCHMARK_MARGINALS, "benchmark")
    for age, block in walking_by_age().items():
        check(block, f"benchmark/walking/{age}")
        for resp, share in block.items():
            lines.append(f"response,Age Group,{age},walking,{resp},{share:.1f}")
    (root / "fixtures").mkdir(parents=True, exist_ok=True)
    (root / "fixtures" / "benchmark_fixture.csv").write_text("\n".join(lines) + "\n")

    prior = ["# SYNTHETIC naive prior: coarse general-knowledge marginals, not benchmark data.", header]
    write_marginals(prior, NAIVE_PRIOR, "prior")
    (root / "prior").mkdir(parents=True, exist_ok=True)
    (root / "prior" / "naive_prior.csv").write_text("\n".join(prior) + "\n")


if __name__ == "__main__":
    main()
