"""End to end: sweep accuracy vs perturbation power, render the curves.

Builds a sweep config like the one you would check into a repo, runs it
through the same code path as `rfadv sweep`, writes the CSV, then renders
the SVG like `rfadv plot`. Channel and noise draws are paired across attacks
(same seed, same trial index, same randomness), so curve gaps are attack
effects, not sampling luck.

Run:  python3 demos/07_sweep_and_plot.py   (writes under demo_out/)
"""
import json
import os

from rfadv import load_sweep_config, plot_csv, sweep_from_config, write_sweep_csv

from _shared import OUT, demo_dataset, demo_model

DATASET_PATH = os.path.join(OUT, "demo_dataset.bin")

CONFIG = {
    "model": "demo_model.bin",
    "dataset": "demo_dataset.bin",
    "split": "test",
    "eval_snr_db": "inf",
    "attacks": ["none", "noch", "channel-inversion", "mrpp-targeted",
                "mrpp-nontargeted"],
    "pnr_grid_db": [-10.0, -5.0, 0.0, 5.0, 10.0],
    "snr_db": 10.0,
    "trials": 120,
    "seed": 7,
    "pnr_reference": "receiver",
}


def main():
    ds = demo_dataset()
    demo_model(ds)  # ensures demo_out/demo_model.bin exists
    from rfadv import save_dataset
    save_dataset(DATASET_PATH, ds)

    cfg_path = os.path.join(OUT, "demo_sweep.json")
    with open(cfg_path, "w") as fh:
        json.dump(CONFIG, fh, indent=2)
    print(f"wrote {cfg_path}")

    rows = sweep_from_config(load_sweep_config(cfg_path), threads=2)
    csv_path = os.path.join(OUT, "demo_sweep.csv")
    write_sweep_csv(csv_path, rows)
    print(f"wrote {csv_path} ({len(rows)} rows)")

    print(f"\n{'attack':>20}  " + "  ".join(f"{p:+5.0f}dB" for p in
                                            CONFIG["pnr_grid_db"]))
    by_attack = {}
    for r in rows:
        by_attack.setdefault(r.attack, []).append(r)
    for attack, cells in sorted(by_attack.items()):
        if attack == "none":
            print(f"{attack:>20}  {cells[0].accuracy:.3f} at every PNR "
                  f"(no perturbation)")
            continue
        accs = "  ".join(f"{c.accuracy:7.3f}" for c in cells)
        print(f"{attack:>20}  {accs}")

    svg_path = os.path.join(OUT, "demo_sweep.svg")
    plot_csv(csv_path, svg_path, title="accuracy vs PNR, paired trials")
    print(f"\nwrote {svg_path}; equivalent CLI:")
    print(f"  rfadv sweep --config {cfg_path} --out {csv_path}")
    print(f"  rfadv plot --csv {csv_path} --out {svg_path}")


if __name__ == "__main__":
    main()
