#!/usr/bin/env python3
"""Download the public source data used by the impactlens analysis.

Fetches the two LAPD crime-report extracts from the Los Angeles Open Data
portal (Socrata API) and the LAX daily-summaries temperature record from
NOAA NCEI, then writes CSV files that `impactlens ingest` accepts.

This is a convenience helper, not part of the library contract: the portal
revises records over time, so counts drift relative to any frozen
snapshot. Requires network access.

Usage:
    python3 scripts/fetch_data.py --out data/raw
"""

import argparse
import csv
import json
import sys
import urllib.parse
import urllib.request

PORTAL = "https://data.lacity.org/resource"
# 2010-2019 and 2020-present crime datasets
DATASETS = {
    "lapd_2017_2019.csv": ("63jg-8b9z", "2017-01-01", "2020-01-01"),
    "lapd_2020.csv": ("2nrs-mtv8", "2020-01-01", "2020-03-29"),
}
NCEI_URL = (
    "https://www.ncei.noaa.gov/access/services/data/v1"
    "?dataset=daily-summaries&stations=USW00023174"
    "&dataTypes=TMAX,TMIN,TAVG&startDate=2017-01-01&endDate=2020-03-28"
    "&format=json&units=standard"
)
PAGE = 50000


def fetch_json(url):
    with urllib.request.urlopen(url, timeout=120) as resp:
        return json.load(resp)


def fetch_crimes(dataset_id, start, end, path):
    rows = []
    offset = 0
    while True:
        query = urllib.parse.urlencode(
            {
                "$select": "date_occ,crm_cd_desc",
                "$where": f"date_occ >= '{start}' AND date_occ < '{end}'",
                "$order": "date_occ",
                "$limit": PAGE,
                "$offset": offset,
            }
        )
        page = fetch_json(f"{PORTAL}/{dataset_id}.json?{query}")
        rows.extend(page)
        print(f"  {dataset_id}: {len(rows)} rows", file=sys.stderr)
        if len(page) < PAGE:
            break
        offset += PAGE
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["DATE OCC", "Crm Cd Desc"])
        for row in rows:
            writer.writerow([row.get("date_occ", ""), row.get("crm_cd_desc", "")])
    print(f"wrote {path} ({len(rows)} rows)", file=sys.stderr)


def fetch_temperature(path):
    rows = fetch_json(NCEI_URL)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["STATION", "DATE", "TMAX", "TMIN", "TAVG"])
        for row in rows:
            writer.writerow(
                [
                    row.get("STATION", ""),
                    row.get("DATE", ""),
                    row.get("TMAX", ""),
                    row.get("TMIN", ""),
                    row.get("TAVG", ""),
                ]
            )
    print(f"wrote {path} ({len(rows)} rows)", file=sys.stderr)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args()

    import os

    os.makedirs(args.out, exist_ok=True)
    for name, (dataset_id, start, end) in DATASETS.items():
        fetch_crimes(dataset_id, start, end, os.path.join(args.out, name))
    fetch_temperature(os.path.join(args.out, "lax_temperature.csv"))


if __name__ == "__main__":
    main()
