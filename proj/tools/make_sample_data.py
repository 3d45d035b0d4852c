#!/usr/bin/env python3
"""Write the bundled sample extract in FRED CSV layout.

Source: the public US quarterly macro dataset shipped with statsmodels
(1959Q1-2009Q3, compiled from FRED/BEA/BLS). Two series are proxies:
  FEDFUNDS  <- 3-month Treasury bill rate (tbilrate)
  GDPPOT    <- Hodrick-Prescott trend (lambda = 1600) of log real GDP
CPIAUCSL, UNRATE and GDPC1 are the dataset's cpi, unemp and realgdp columns.
"""
import argparse
import pathlib

import numpy as np
import statsmodels.api as sm


def write_series(path, series_id, dates, values):
    with open(path, "w", newline="\n") as f:
        f.write(f"DATE,{series_id}\n")
        for d, v in zip(dates, values):
            f.write(f"{d},{v:.3f}\n")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data/sample")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    df = sm.datasets.macrodata.load_pandas().data
    dates = [f"{int(y):04d}-{3 * (int(q) - 1) + 1:02d}-01" for y, q in zip(df.year, df.quarter)]
    _, trend = sm.tsa.filters.hpfilter(np.log(df.realgdp.values), lamb=1600)

    write_series(out / "CPIAUCSL.csv", "CPIAUCSL", dates, df.cpi.values)
    write_series(out / "UNRATE.csv", "UNRATE", dates, df.unemp.values)
    write_series(out / "GDPC1.csv", "GDPC1", dates, df.realgdp.values)
    write_series(out / "GDPPOT.csv", "GDPPOT", dates, np.exp(trend))
    write_series(out / "FEDFUNDS.csv", "FEDFUNDS", dates, df.tbilrate.values)


if __name__ == "__main__":
    main()
