"""Median |FM rate| per method on chirp bursts at several rates and seeds."""
import argparse
import time

import numpy as np

from birdfm.extractors import METHODS, extract
from birdfm.synth import chirp_bursts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--snr", type=float, default=20.0)
    ap.add_argument("--rates", type=float, nargs="+", default=[1e3, 1e4, 1e5])
    args = ap.parse_args()
    print("seed\trate\t" + "\t".join(METHODS) + "\tseconds")
    for seed in range(args.seeds):
        for rate in args.rates:
            clip = chirp_bursts(rate, snr_db=args.snr, seed=seed)
            t0 = time.perf_counter()
            ratios = [np.median([abs(a.fm_rate) for a in extract(clip, m)]) / rate for m in METHODS]
            print(f"{seed}\t{rate:g}\t" + "\t".join(f"{r:.4f}" for r in ratios)
                  + f"\t{time.perf_counter() - t0:.2f}")


if __name__ == "__main__":
    main()
