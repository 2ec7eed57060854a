#!/usr/bin/env python3
"""Plot sald output.

  plot_results.py sweep results/two_moons_sweep.csv -o kl.png
  plot_results.py trace results/two_moons_va_sald_r1.csv [more.csv ...] -o trace.png
  plot_results.py target target.csv --particles run_snapshots.csv -o target.png
"""
import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def plot_sweep(args):
    df = pd.read_csv(args.csv[0])
    df = df[df["status"] == "ok"]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for method, rows in df.groupby("method"):
        rows = rows.sort_values("r")
        axes[0].plot(rows["r"], rows["kl"], marker="o", label=method)
        axes[1].plot(rows["r"], rows["mean_penalty"], marker="o", label=method)
    for ax, name in zip(axes, ["terminal KL", "mean penalty"]):
        ax.set_xscale("log")
        ax.set_xlabel("r")
        ax.set_ylabel(name)
        ax.legend()
    fig.suptitle(df["task"].iloc[0])
    return fig


def plot_trace(args):
    fig, ax = plt.subplots(figsize=(6, 4))
    for path in args.csv:
        df = pd.read_csv(path)
        label = f"{df['method'].iloc[0]} r={df['r'].iloc[0]:g}"
        ax.plot(df["t"], df["kl"], label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("KL to guided target")
    ax.legend()
    return fig


def plot_target(args):
    df = pd.read_csv(args.csv[0])
    xs = np.sort(df["x"].unique())
    ys = np.sort(df["y"].unique())
    density = df.pivot(index="y", columns="x", values="density").to_numpy()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(density, origin="lower", extent=[xs[0], xs[-1], ys[0], ys[-1]], cmap="viridis")
    if args.particles:
        snap = pd.read_csv(args.particles)
        last = snap[snap["step"] == snap["step"].max()]
        ax.scatter(last["x"], last["y"], s=1, c="white", alpha=0.3)
    ax.set_aspect("equal")
    return fig


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("kind", choices=["sweep", "trace", "target"])
    parser.add_argument("csv", nargs="+")
    parser.add_argument("--particles", help="snapshots CSV to overlay on a target plot")
    parser.add_argument("-o", "--output", default="plot.png")
    args = parser.parse_args()
    fig = {"sweep": plot_sweep, "trace": plot_trace, "target": plot_target}[args.kind](args)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
