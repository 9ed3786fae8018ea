"""Evolve the 1D hard-wall box and compare against the exact series.

Writes per-cell density CSVs plus a summary with the RMSE per run.
"""

import argparse

from wzsim.experiments import RunConfig, run_box_evolve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/box", help="output directory")
    ap.add_argument("--qubits", type=int, default=8, help="qubits per axis")
    ap.add_argument("--steps", type=int, default=1000, help="time steps")
    ap.add_argument("--method", default="spectral", choices=["trotter", "spectral"])
    ap.add_argument(
        "--times", type=float, nargs="+", default=[1e-3], help="evolution times to run"
    )
    args = ap.parse_args()

    cfg = RunConfig(
        qubits_per_axis=args.qubits,
        steps=args.steps,
        kinetic_method=args.method,
        evolve_times=args.times,
    )
    summary = run_box_evolve(cfg, args.out)
    for run in summary["runs"]:
        print(f"T={run['T']:g}  rmse={run['rmse']:.6e}  yb={run['yb_error']:.6e}")
    print(f"wrote {args.out}/summary.json")


if __name__ == "__main__":
    main()
