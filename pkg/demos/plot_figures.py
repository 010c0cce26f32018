"""Plot the CSVs written by the command-line tool (needs matplotlib).

    multiramsey osrs --F 1..5 --curves --chi-grid 400
    multiramsey sweep --mode cfim
    multiramsey sweep --mode monte-carlo --sigma 14 --runs 1000 --seed 7 --grid 0.02pi:0.98pi:25
    python demos/plot_figures.py out/osrs/<digest>/data.csv out/sweep/<digest>/data.csv ...
"""

import csv
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import TwoSlopeNorm


def load(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]])


def plot_osrs(data, ax):
    for F in np.unique(data[:, 0]):
        sub = data[data[:, 0] == F]
        for m in np.unique(sub[:, 1]):
            c = sub[sub[:, 1] == m]
            ax.semilogy(c[:, 2] / np.pi, c[:, 3], label=f"F={F:g}, m_i={m:g}")
    ax.set_ylim(1, 1e3)
    ax.set_xlabel(r"$\chi/\pi$")
    ax.set_ylabel(r"$(\Delta\theta)^2 N$")
    ax.legend(fontsize=6)


def plot_sweep(data, ax):
    n = int(round(np.sqrt(len(data))))
    z = data[:, 2].reshape(n, n)
    extent = [data[0, 1] / np.pi, data[-1, 1] / np.pi, data[0, 0] / np.pi, data[-1, 0] / np.pi]
    # near-singular points reach hundreds of negative dB; keep the scale readable
    im = ax.imshow(
        np.where(np.isfinite(z), z, np.nan), origin="lower", extent=extent, cmap="RdBu_r",
        norm=TwoSlopeNorm(vmin=-3.0, vcenter=0.0, vmax=1.5),
    )
    ax.contour(np.linspace(extent[0], extent[1], n), np.linspace(extent[2], extent[3], n), z, [0], colors="w")
    ax.set_xlabel(r"$\theta_2/\pi$")
    ax.set_ylabel(r"$\theta_1/\pi$")
    plt.colorbar(im, ax=ax, label=r"$\zeta$ (dB)")


def main(paths):
    fig, axes = plt.subplots(1, len(paths), figsize=(5 * len(paths), 4), squeeze=False)
    for path, ax in zip(paths, axes[0]):
        header, data = load(path)
        if header[:2] == ["F", "m_i"]:
            plot_osrs(data, ax)
        elif header == ["theta1", "theta2", "zeta_db"]:
            plot_sweep(data, ax)
        else:
            raise SystemExit(f"{path}: no plot for columns {header}")
        ax.set_title(Path(path).parent.name)
    fig.tight_layout()
    fig.savefig("figures.png", dpi=150)
    print("wrote figures.png")


if __name__ == "__main__":
    main(sys.argv[1:])
