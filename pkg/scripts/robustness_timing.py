"""Noise and codec robustness plus the runtime benchmark on the mixed corpus."""
import argparse
import tempfile

from birdfm.pipeline import bench
from birdfm.robustness import DEFAULT_CODEC_COMMAND, DegradationSpec, robustness_study
from birdfm.synth import mixed_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noise-db", type=float, default=-45.0)
    ap.add_argument("--codec-cmd", default=None,
                    help=f"shell template with {{in}} and {{out}}; default {DEFAULT_CODEC_COMMAND!r}")
    args = ap.parse_args()
    specs = [DegradationSpec("white_noise", noise_level=args.noise_db, rng_seed=args.seed)]
    if args.codec_cmd:
        specs.append(DegradationSpec("external_codec", codec_command=args.codec_cmd))
    with tempfile.TemporaryDirectory() as tmp:
        corpus = mixed_corpus(tmp, seed=args.seed)
        report = robustness_study(corpus.entries, specs)
        timing = bench(corpus.entries)
    print("degradation\tfeature\tr\tr2")
    for e in report.entries:
        r = "nan" if e.r is None else f"{e.r:.4f}"
        r2 = "nan" if e.r_squared is None else f"{e.r_squared:.4f}"
        print(f"{e.degradation}\t{e.feature}\t{r}\t{r2}")
    for failure in report.failures:
        print("failed:", *failure)
    print("\nmethod\tx real time")
    for m in timing.method_seconds:
        print(f"{m}\t{timing.ratio(m):.4f}")


if __name__ == "__main__":
    main()
