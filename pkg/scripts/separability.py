"""Two-species classification: mean weighted AUC per method and feature set."""
import argparse
import tempfile

import numpy as np

from birdfm.evaluation import FEATURE_SETS, run_experiment
from birdfm.extractors import METHODS
from birdfm.pipeline import extract_corpus
from birdfm.selection import LabelledTable
from birdfm.synth import two_species_corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus-seed", type=int, default=0)
    ap.add_argument("--cv-seed", type=int, default=0)
    ap.add_argument("--shuffle", type=int, default=None, help="permute labels with this seed")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        corpus = two_species_corpus(tmp, seed=args.corpus_seed)
        rows, _ = extract_corpus(corpus.entries, n_jobs=args.jobs)
    if args.shuffle is not None:
        labels = np.random.default_rng(args.shuffle).permutation([r.species for r in rows])
        for r, y in zip(rows, labels):
            r.species = str(y)
    results = run_experiment(LabelledTable(rows), seed=args.cv_seed, n_jobs=args.jobs)
    print("method\t" + "\t".join(FEATURE_SETS))
    for m in METHODS:
        cells = [np.nanmean([r.weighted_auc for r in results if r.method == m and r.feature_set == s])
                 for s in FEATURE_SETS]
        print(m + "\t" + "\t".join(f"{v:.3f}" for v in cells))
    print(f"grand mean {np.nanmean([r.weighted_auc for r in results]):.4f}")


if __name__ == "__main__":
    main()
