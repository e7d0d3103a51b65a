#!/usr/bin/env python3
"""Regenerate the synthetic clickstream fixture corpus.

Writes tests/fixtures/clickstream.jsonl and campaign.json. The corpus is
sampled from a hand-authored browsing chain, independent of the package
code, so pipeline outputs can be checked against it as ground truth.
Deterministic for a fixed seed; rerunning must reproduce the same bytes.
"""

import json
import sys
from pathlib import Path

import numpy as np

SEED = 2016
OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

SEGMENT = {"country": "United States", "browser": "Chrome", "source": "google"}

# month starts, epoch ms (Aug/Sep/Oct/Nov 2016); sessions per month
MONTHS = [1470009600000, 1472688000000, 1475280000000]
MONTH_SESSIONS = [260, 200, 140]
T_END = 1477958400000

LEAVE = "leave"

START_DIST = {
    "Viewed homepage": 0.55,
    "Searched products": 0.25,
    "Viewed promotions": 0.12,
    "Clicked through product list": 0.08,
}

CHAIN = {
    "Viewed homepage": {
        "Searched products": 0.30,
        "Clicked through product list": 0.25,
        "Viewed promotions": 0.15,
        LEAVE: 0.30,
    },
    "Searched products": {
        "Viewed product details": 0.45,
        "Clicked through product list": 0.25,
        LEAVE: 0.30,
    },
    "Clicked through product list": {
        "Viewed product details": 0.50,
        "Searched products": 0.15,
        LEAVE: 0.35,
    },
    "Viewed product details": {
        "Added product to cart": 0.30,
        "Clicked through product list": 0.20,
        "Searched products": 0.15,
        LEAVE: 0.35,
    },
    "Added product to cart": {
        "Started checkout": 0.55,
        "Viewed product details": 0.20,
        LEAVE: 0.25,
    },
    "Started checkout": {
        "Completed purchase": 0.60,
        "Viewed product details": 0.10,
        LEAVE: 0.30,
    },
    "Completed purchase": {
        "Viewed homepage": 0.15,
        LEAVE: 0.85,
    },
    "Viewed promotions": {
        "Viewed product details": 0.35,
        "Viewed homepage": 0.25,
        LEAVE: 0.40,
    },
}

MAX_EVENTS = 12


def pick(rng, dist):
    names = list(dist)
    return names[rng.choice(len(names), p=list(dist.values()))]


def sample_walk(rng):
    state = pick(rng, START_DIST)
    walk = [state]
    while len(walk) < MAX_EVENTS:
        state = pick(rng, CHAIN[state])
        if state == LEAVE:
            break
        walk.append(state)
    return walk


def main():
    rng = np.random.default_rng(SEED)
    records = []
    sid = 0
    for month_start, n in zip(MONTHS, MONTH_SESSIONS):
        for _ in range(n):
            start_ts = month_start + int(rng.integers(0, 28 * 24 * 3600 * 1000))
            ts = start_ts
            for k, action in enumerate(sample_walk(rng)):
                if k:
                    ts += int(rng.integers(5_000, 120_000))
                records.append(
                    {
                        "sessionId": f"s{sid:04d}",
                        "ts": ts,
                        "segment": SEGMENT,
                        "event": {"actionType": action},
                    }
                )
            sid += 1
    records.sort(key=lambda r: (r["ts"], r["sessionId"]))

    OUT_DIR.mkdir(parents=True, exist_ok=True)
    corpus = OUT_DIR / "clickstream.jsonl"
    with corpus.open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")

    campaign = {
        "descriptor": {"actionType": "Clicked spring campaign banner"},
        "segment": SEGMENT,
        "label": "spring-campaign",
    }
    (OUT_DIR / "campaign.json").write_text(
        json.dumps(campaign, ensure_ascii=False, indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    converted = len(
        {
            r["sessionId"]
            for r in records
            if r["event"]["actionType"] == "Completed purchase"
        }
    )
    print(
        f"sessions: {sid}, events: {len(records)}, converting sessions: {converted}",
        file=sys.stderr,
    )


if __name__ == "__main__":
    main()
