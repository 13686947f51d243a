"""Write a synthetic corpus (WAV files plus manifest.csv) to a directory."""
import argparse

from birdfm.synth import mixed_corpus, two_species_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("kind", choices=("mixed", "two-species"))
    ap.add_argument("out")
    ap.add_argument("--n", type=int, default=50, help="clips (mixed) or clips per species")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if args.kind == "mixed":
        corpus = mixed_corpus(args.out, n=args.n, seed=args.seed)
    else:
        corpus = two_species_corpus(args.out, n_per_species=args.n, seed=args.seed)
    print(corpus.manifest)


if __name__ == "__main__":
    main()
