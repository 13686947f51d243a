"""Command-line entry point: ``birdfm {extract,select,classify,degrade,bench}``.

Exit codes: 0 success, 1 some recordings failed, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BirdFMError
from .extractors import METHODS, ChirpGrid
from .ingest import CANONICAL_RATE
from .spectral import AnalysisConfig

log = logging.getLogger("birdfm")

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    manifest: Path | None = None
    out: Path = Path("out")
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    methods: tuple = METHODS
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("at least one method is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {','.join(METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods listed twice")
        if self.jobs == 0:
            raise ConfigError("--jobs must be nonzero")
        try:
            self.analysis.validate(CANONICAL_RATE)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def _parse_band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like 2000:10000, got {text!r}")
    return lo, hi


def _parse_methods(text: str) -> tuple:
    return tuple(m.strip() for m in text.split(",") if m.strip())


def _common(p: argparse.ArgumentParser, manifest: bool = True) -> None:
    if manifest:
        p.add_argument("--manifest", type=Path, required=True, help="CSV/TSV with path and species columns")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--methods", type=_parse_methods, default=METHODS, help="comma list from ss,rm,mp,dd")
    p.add_argument("--frame", type=int, default=512)
    p.add_argument("--hop", type=int, default=512)
    p.add_argument("--band", type=_parse_band, default=(2000.0, 10000.0), metavar="LO:HI")
    p.add_argument("--energy-fraction", type=float, default=0.10)
    p.add_argument("--energy-band", choices=("inband", "full"), default="inband")
    p.add_argument("--no-interpolate", action="store_true", help="report peaks on the bin grid")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="worker count; -1 uses all cores")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="birdfm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="feature table from a manifest")
    _common(p)
    p.add_argument("--atoms", action="store_true", help="also dump per-recording atoms")
    p.add_argument("--lenient", action="store_true", help="exit 0 even if some files fail")

    p = sub.add_parser("select", help="information-gain ranking of a feature table")
    _common(p, manifest=False)
    p.add_argument("--table", type=Path, required=True)

    p = sub.add_parser("classify", help="cross-validated species classification")
    _common(p, manifest=False)
    p.add_argument("--table", type=Path, required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--feature-sets", type=_parse_methods, default=("FM", "Freq", "Top2", "FMFreq"))

    p = sub.add_parser("degrade", help="clean-versus-degraded feature correlation")
    _common(p)
    p.add_argument("--noise-db", type=float, default=-45.0)
    p.add_argument("--codec-cmd", default=None, help="shell template with {in} and {out}")
    p.add_argument("--degradations", type=_parse_methods, default=("noise", "codec"))

    p = sub.add_parser("bench", help="single-threaded runtime per method")
    _common(p)
    return parser


def run_config(args) -> RunConfig:
    analysis = AnalysisConfig(frame_size=args.frame, hop_size=args.hop, band_low=args.band[0],
                              band_high=args.band[1], energy_fraction=args.energy_fraction,
                              energy_band=args.energy_band, interpolate=not args.no_interpolate)
    return RunConfig(getattr(args, "manifest", None), args.out, analysis, tuple(args.methods),
                     args.seed, args.jobs)


def _manifest(cfg: RunConfig):
    from .ingest import load_manifest
    entries = load_manifest(cfg.manifest)
    if not entries:
        raise ConfigError(f"{cfg.manifest}: manifest lists no recordings")
    return entries


def cmd_extract(cfg: RunConfig, atoms: bool = False, lenient: bool = False) -> int:
    from .features import write_table
    from .pipeline import extract_corpus

    entries = _manifest(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    rows, failures = extract_corpus(entries, cfg.analysis, cfg.methods, ChirpGrid.default(),
                                    n_jobs=cfg.jobs, atoms_dir=cfg.out / "atoms" if atoms else None)
    write_table(rows, cfg.out / "features.csv")
    log.info("wrote %d rows to %s", len(rows), cfg.out / "features.csv")
    return EXIT_PARTIAL if failures and not lenient else EXIT_OK


def cmd_select(cfg: RunConfig, table: Path) -> int:
    from .features import read_table
    from .selection import LabelledTable, rank_features, write_ranking

    try:
        labelled = LabelledTable(read_table(table))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_ranking(rank_features(labelled), cfg.out / "ranking.csv")
    return EXIT_OK


def cmd_classify(cfg: RunConfig, table: Path, folds: int = 10, feature_sets=()) -> int:
    from .evaluation import FEATURE_SETS, run_experiment, write_folds
    from .features import read_table
    from .selection import LabelledTable

    unknown = [s for s in feature_sets if s not in FEATURE_SETS]
    if unknown:
        raise ConfigError(f"unknown feature sets {unknown}")
    if folds < 2:
        raise ConfigError("--folds must be at least 2")
    try:
        labelled = LabelledTable(read_table(table))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    results = run_experiment(labelled, cfg.methods, tuple(feature_sets), folds, cfg.seed, cfg.jobs)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_folds(results, cfg.out / "folds.csv")
    return EXIT_OK


def cmd_degrade(cfg: RunConfig, noise_db: float = -45.0, codec_cmd: str | None = None,
                degradations=("noise", "codec")) -> int:
    from .robustness import DEFAULT_CODEC_COMMAND, DegradationSpec, robustness_study

    specs = []
    for name in degradations:
        if name == "noise":
            specs.append(DegradationSpec("white_noise", noise_level=noise_db, rng_seed=cfg.seed))
        elif name == "codec":
            specs.append(DegradationSpec("external_codec", codec_command=codec_cmd or DEFAULT_CODEC_COMMAND))
        else:
            raise ConfigError(f"unknown degradation {name!r}")
    entries = _manifest(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    report = robustness_study(entries, specs, cfg.analysis, cfg.methods, ChirpGrid.default(),
                              n_jobs=cfg.jobs)
    report.write(cfg.out / "robustness.csv")
    return EXIT_PARTIAL if report.failures else EXIT_OK


def cmd_bench(cfg: RunConfig) -> int:
    from .pipeline import bench

    entries = _manifest(cfg)
    try:
        result = bench(entries, cfg.methods, cfg.analysis, ChirpGrid.default())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.out.mkdir(parents=True, exist_ok=True)
    result.write(cfg.out / "timing.csv")
    for m in cfg.methods:
        print(f"{m}\t{result.ratio(m):.4f}")
    return EXIT_PARTIAL if result.failures else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = run_config(args)
        if args.command == "extract":
            return cmd_extract(cfg, args.atoms, args.lenient)
        if args.command == "select":
            return cmd_select(cfg, args.table)
        if args.command == "classify":
            return cmd_classify(cfg, args.table, args.folds, args.feature_sets)
        if args.command == "degrade":
            return cmd_degrade(cfg, args.noise_db, args.codec_cmd, args.degradations)
        return cmd_bench(cfg)
    except (ValueError, BirdFMError, FileNotFoundError) as exc:
        print(f"birdfm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
