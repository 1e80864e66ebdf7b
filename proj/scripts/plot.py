#!/usr/bin/env python3
"""Plot a ddsim sweep CSV: BER, NMSE and SE against SNR, or against nu_max
when the sweep has a single SNR."""
import argparse
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("-o", "--out", default=None, help="output image (default: <csv>.png)")
    args = ap.parse_args()

    df = pd.read_csv(args.csv)
    df = df[df.frame_index == "all"]
    if df.empty:
        sys.exit("no aggregate rows in " + args.csv)
    x = "nu_max" if df.snr_db.nunique() == 1 and df.nu_max.nunique() > 1 else "snr_db"

    fig, axes = plt.subplots(1, 3, figsize=(15, 4.5))
    for (scheme, mode, F), g in df.groupby(["scheme", "mode", "F"]):
        g = g.sort_values(x)
        label = f"{scheme} {mode}" + (f" F={F}" if mode == "data" else "")
        axes[0].errorbar(g[x], g.ber.clip(lower=1e-6), yerr=g.ber_ci, label=label, marker="o", ms=3, capsize=2)
        if g.nmse_db.notna().any():
            axes[1].plot(g[x], g.nmse_db, marker="o", ms=3, label=label)
        axes[2].plot(g[x], g.se, marker="o", ms=3, label=label)

    xlabel = "nu_max (Hz)" if x == "nu_max" else "SNR (dB)"
    axes[0].set_yscale("log")
    for ax, title in zip(axes, ["BER", "NMSE (dB)", "SE (bits/s/Hz)"]):
        ax.set_xlabel(xlabel)
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
    if x == "nu_max":
        for ax in axes:
            ax.axvline(937.5, color="k", ls=":", lw=1)
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    out = args.out or args.csv.rsplit(".", 1)[0] + ".png"
    fig.savefig(out, dpi=120)
    print(out)


if __name__ == "__main__":
    main()
