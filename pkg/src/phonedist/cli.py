"""Command-line interface: ingest a corpus once, then run analyses off the export.

Two phases by design: `ingest` walks alignments and unit sequences and writes
a sparse per-category count export; every other subcommand reads that export,
so the expensive corpus pass happens exactly once. All numeric output is
serialized with 9 significant digits and all orderings are fixed, which makes
repeated runs byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import cluster as cluster_mod
from . import corpus, distribution, infotheory, phonology, stats
from .errors import MissingExport, PhonedistError, TooFewPoints

log = logging.getLogger("phonedist")

EXPORT_FILENAME = "distributions.jsonl"
SUBSETS = ("all", "vowels", "consonants")
REPORT_NEIGHBORS = 5

#: Exit statuses: INPUT for missing/empty inputs, FAILURE for processing errors.
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2


@dataclass
class RunConfig:
    units_path: Path | None = None
    alignments_path: Path | None = None
    mapping_path: Path | None = None
    features_path: Path | None = None
    classes_path: Path | None = None
    output_dir: Path = Path("phonedist-out")
    model_id: str | None = None

    def resolved_mapping(self) -> Path:
        return self.mapping_path or phonology.default_mapping_path()

    def resolved_features(self) -> Path:
        return self.features_path or phonology.default_features_path()

    def resolved_classes(self) -> Path:
        return self.classes_path or phonology.default_classes_path()

    def export_path(self) -> Path:
        return self.output_dir / EXPORT_FILENAME


_PATH_FIELDS = {f.name for f in fields(RunConfig)} - {"model_id"}


def load_run_config(path: str | Path) -> RunConfig:
    """Flat "key = value" file mirroring RunConfig fields; '#' starts a comment."""
    config = RunConfig()
    base = Path(path).resolve().parent
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise PhonedistError(f"{path}:{lineno}: expected 'key = value'")
            key, value = key.strip(), value.strip()
            if key in _PATH_FIELDS:
                setattr(config, key, base / value if not Path(value).is_absolute() else Path(value))
            elif key == "model_id":
                config.model_id = value
            else:
                raise PhonedistError(f"{path}:{lineno}: unknown config key {key!r}")
    return config


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _round9(x: float) -> float:
    """Round to 9 significant digits so JSON output is byte-deterministic."""
    return float(f"{x:.9g}")


# ---------------------------------------------------------------------------
# ingest


@dataclass
class IngestDiagnostics:
    utterances: int = 0
    utterances_without_alignment: int = 0
    assigned_frames: int = 0
    skipped_segments: int = 0
    total_observations: int = 0
    categories: int = 0
    utilization: float = 0.0

    def print(self, out) -> None:
        print(f"utterances: {self.utterances}", file=out)
        print(f"utterances without alignment: {self.utterances_without_alignment}", file=out)
        print(f"assigned frames: {self.assigned_frames}", file=out)
        print(f"skipped segments: {self.skipped_segments}", file=out)
        print(f"total observations: {self.total_observations}", file=out)
        print(f"categories: {self.categories}", file=out)
        print(f"utilization: {_fmt(self.utilization)}", file=out)


def _unit_files(units_path: Path) -> list[Path]:
    if units_path.is_file():
        return [units_path]
    if units_path.is_dir():
        return sorted(p for p in units_path.rglob("*.jsonl") if p.is_file())
    raise MissingExport(f"units path {units_path} does not exist")


def _alignment_index(alignments_path: Path) -> dict[str, Path]:
    """Utterance id -> .phn path; ids are extension-stripped relative paths."""
    if alignments_path.is_file():
        return {alignments_path.stem: alignments_path}
    if not alignments_path.is_dir():
        raise MissingExport(f"alignments path {alignments_path} does not exist")
    index: dict[str, Path] = {}
    for path in sorted(alignments_path.rglob("*")):
        if path.is_file() and path.suffix.lower() == ".phn":
            uid = path.relative_to(alignments_path).with_suffix("").as_posix()
            index[uid] = path
    return index


def cmd_ingest(config: RunConfig) -> IngestDiagnostics:
    """Corpus pass: parse, map, align, accumulate, export."""
    if config.units_path is None or config.alignments_path is None:
        raise PhonedistError("ingest needs both --units and --alignments")
    mapping = corpus.load_phone_mapping(config.resolved_mapping())
    unit_files = _unit_files(config.units_path)
    alignment_index = _alignment_index(config.alignments_path)

    diag = IngestDiagnostics()
    bags: dict[str, corpus.UnitObservationBag] = {}
    inventory: tuple[int, int] | None = None
    model_ids: set[str] = set()
    for unit_file in unit_files:
        for units in corpus.read_unit_sequences(unit_file):
            if config.model_id is not None and units.model_id != config.model_id:
                continue
            model_ids.add(units.model_id)
            if len(model_ids) > 1:
                raise PhonedistError(
                    f"multiple model ids present ({sorted(model_ids)}); "
                    "pass --model to select one"
                )
            if inventory is None:
                inventory = (units.num_groups, units.group_size)
            elif inventory != (units.num_groups, units.group_size):
                raise PhonedistError(
                    f"utterance {units.utterance_id!r}: inventory "
                    f"{(units.num_groups, units.group_size)} differs from {inventory}"
                )
            phn_path = alignment_index.get(units.utterance_id)
            if phn_path is None:
                log.warning("no alignment for utterance %r; skipped", units.utterance_id)
                diag.utterances_without_alignment += 1
                continue
            try:
                alignment = corpus.parse_phn(
                    phn_path.read_text(encoding="utf-8"), utterance_id=units.utterance_id
                )
                reduced = corpus.apply_mapping(alignment, mapping)
            except PhonedistError as exc:
                raise PhonedistError(f"{phn_path}: {exc}") from exc
            assignments = corpus.align_frames(reduced, units)
            diag.skipped_segments += len(corpus.skipped_segments(reduced, units))
            corpus.accumulate_bags(assignments, units, bags)
            diag.utterances += 1
            diag.assigned_frames += len(assignments)
    if inventory is None:
        raise MissingExport(f"no unit sequences found under {config.units_path}")

    num_groups, group_size = inventory
    omega_size = num_groups * group_size
    diag.total_observations = sum(b.total for b in bags.values())
    diag.categories = len(bags)
    if bags:
        dists = [distribution.estimate(b) for b in bags.values()]
        diag.utilization = distribution.utilization(dists)

    config.output_dir.mkdir(parents=True, exist_ok=True)
    distribution.write_distribution_export(
        config.export_path(),
        bags.values(),
        omega_size=omega_size,
        model_id=model_ids.pop() if model_ids else "",
        num_groups=num_groups,
        group_size=group_size,
    )
    return diag


# ---------------------------------------------------------------------------
# analyses over the export


def _load_export(config: RunConfig):
    path = config.export_path()
    if not path.is_file():
        raise MissingExport(
            f"no ingest export at {path}; run 'phonedist ingest' first"
        )
    header, bags = distribution.read_distribution_export(path)
    dists = [distribution.estimate(b) for b in sorted(bags, key=lambda b: b.category)]
    return header, dists


def _entropy_rows(dists) -> list[tuple]:
    rows = []
    for dist in dists:
        rows.append(
            (
                dist.category,
                dist.total_observations,
                infotheory.entropy(dist),
                infotheory.normalized_entropy(dist),
                dist.support_size,
            )
        )
    return rows


def cmd_entropy(config: RunConfig) -> Path:
    _, dists = _load_export(config)
    out = config.output_dir / "entropy.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["category", "total_observations", "entropy_bits", "normalized_entropy", "support_size"]
        )
        for category, total, h, hn, support in _entropy_rows(dists):
            writer.writerow([category, total, _fmt(h), _fmt(hn), support])
    return out


def _require_pairable(dists) -> None:
    if len(dists) < 2:
        raise PhonedistError(
            f"divergence analyses need at least 2 categories, got {len(dists)}"
        )


def cmd_divergence(config: RunConfig) -> Path:
    _, dists = _load_export(config)
    _require_pairable(dists)
    matrix = infotheory.jsd_matrix(dists)
    out = config.output_dir / "jsd_matrix.csv"
    infotheory.write_matrix_csv(matrix, out)
    return out


def cmd_cluster(config: RunConfig) -> tuple[Path, Path]:
    _, dists = _load_export(config)
    _require_pairable(dists)
    dendrogram = cluster_mod.ward_cluster(infotheory.jsd_matrix(dists))
    merges_out = config.output_dir / "merges.csv"
    cluster_mod.write_merges_csv(dendrogram, merges_out)
    newick_out = config.output_dir / "dendrogram.nwk"
    newick_out.write_text(cluster_mod.to_newick(dendrogram) + "\n", encoding="utf-8")
    return merges_out, newick_out


def _subset_labels(subset: str, categories, classes: phonology.ClassTable):
    if subset == "all":
        return None
    vowels = {c for c in categories if classes.class_of(c) == "vowel"}
    return vowels if subset == "vowels" else set(categories) - vowels


def _correlations(config: RunConfig, dists, subsets) -> list[stats.CorrelationResult]:
    categories = [d.category for d in dists]
    features = phonology.load_feature_table(config.resolved_features())
    classes = phonology.load_class_table(config.resolved_classes())
    jsd = infotheory.jsd_matrix(dists)
    feat = phonology.feature_distance_matrix(categories, features)
    results = []
    for subset in subsets:
        labels = _subset_labels(subset, categories, classes)
        results.append(
            stats.correlate_matrices(jsd, feat, subset=labels, subset_name=subset)
        )
    return results


def cmd_correlate(config: RunConfig, subset: str = "all") -> Path:
    if subset not in SUBSETS:
        raise PhonedistError(f"--subset must be one of {SUBSETS}, got {subset!r}")
    _, dists = _load_export(config)
    _require_pairable(dists)
    results = _correlations(config, dists, [subset])
    out = config.output_dir / "correlations.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["subset", "n_pairs", "r", "p_value"])
        for res in results:
            writer.writerow([res.subset, res.n_pairs, _fmt(res.r), _fmt(res.p_value)])
    return out


def cmd_nearest(config: RunConfig, k: int = 5, category: str | None = None) -> Path:
    _, dists = _load_export(config)
    _require_pairable(dists)
    matrix = infotheory.jsd_matrix(dists)
    queries = [category] if category is not None else list(matrix.labels)
    out = config.output_dir / "similarity.csv"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["query", "rank", "neighbor", "jsd"])
        for query in queries:
            for rank, (neighbor, d) in enumerate(
                stats.top_k_similar(matrix, query, min(k, matrix.size - 1)), start=1
            ):
                writer.writerow([query, rank, neighbor, _fmt(d)])
    return out


def cmd_report(config: RunConfig) -> Path:
    """Run the whole battery and emit one machine-readable JSON report."""
    header, dists = _load_export(config)
    report: dict = {
        "format_version": 1,
        "model_id": header.get("model_id", ""),
        "omega_size": header.get("omega_size"),
        "categories": [d.category for d in dists],
        "utilization": _round9(distribution.utilization(dists)) if dists else None,
        "entropy": {
            category: {
                "total_observations": total,
                "entropy_bits": _round9(h),
                "normalized_entropy": _round9(hn),
                "support_size": support,
            }
            for category, total, h, hn, support in _entropy_rows(dists)
        },
    }

    classes = phonology.load_class_table(config.resolved_classes())
    entropies = {d.category: infotheory.entropy(d) for d in dists}
    missing_class = sorted(c for c in entropies if c not in classes.classes)
    if missing_class:
        report["class_entropy"] = {
            "status": f"categories missing from class table: {missing_class}"
        }
    else:
        report["class_entropy"] = {
            cls: _round9(h)
            for cls, h in sorted(phonology.class_entropy(entropies, classes).items())
        }

    if len(dists) < 2:
        insufficient = {"status": "insufficient categories"}
        report["divergence"] = insufficient
        report["cluster"] = insufficient
        report["correlations"] = insufficient
        report["nearest"] = insufficient
    else:
        matrix = infotheory.jsd_matrix(dists)
        report["divergence"] = {
            "labels": list(matrix.labels),
            "matrix": [[_round9(v) for v in row] for row in matrix.values],
        }
        dendrogram = cluster_mod.ward_cluster(matrix)
        report["cluster"] = {
            "newick": cluster_mod.to_newick(dendrogram),
            "merges": [
                {
                    "step": step,
                    "left": m.left,
                    "right": m.right,
                    "height": _round9(m.height),
                    "size": m.size,
                }
                for step, m in enumerate(dendrogram.merges)
            ],
        }
        features = phonology.load_feature_table(config.resolved_features())
        missing_feat = sorted(
            c for c in entropies if c not in features.vectors
        )
        if missing_class or missing_feat:
            missing = sorted(set(missing_class) | set(missing_feat))
            report["correlations"] = {
                "status": f"categories missing from feature/class tables: {missing}"
            }
        else:
            correlations: dict = {}
            for subset in SUBSETS:
                try:
                    res = _correlations(config, dists, [subset])[0]
                except TooFewPoints:
                    correlations[subset] = {"status": "insufficient categories"}
                    continue
                correlations[subset] = {
                    "n_pairs": res.n_pairs,
                    "r": _round9(res.r),
                    "p_value": _round9(res.p_value),
                }
            report["correlations"] = correlations
        report["nearest"] = {
            query: [
                [neighbor, _round9(d)]
                for neighbor, d in stats.top_k_similar(
                    matrix, query, min(REPORT_NEIGHBORS, matrix.size - 1)
                )
            ]
            for query in matrix.labels
        }

    out = config.output_dir / "report.json"
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


# ---------------------------------------------------------------------------
# argument parsing and entry point


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="run-config file (key = value lines)")
    shared.add_argument("--output", type=Path, help="output directory")
    shared.add_argument("--model", help="only ingest records with this model id")

    parser = argparse.ArgumentParser(
        prog="phonedist",
        description="Phonetic categories as distributions over discrete speech units.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", parents=[shared], help="build the distribution export")
    p_ingest.add_argument("--units", type=Path, help="unit-sequence file or directory")
    p_ingest.add_argument("--alignments", type=Path, help="directory of .phn files")
    p_ingest.add_argument("--mapping", type=Path, help="phone-mapping file")

    for name, help_text in [
        ("entropy", "per-category entropy report"),
        ("divergence", "pairwise JSD matrix"),
        ("cluster", "Ward dendrogram (merge list + Newick)"),
    ]:
        sub.add_parser(name, parents=[shared], help=help_text)

    p_corr = sub.add_parser("correlate", parents=[shared], help="JSD vs feature-distance correlation")
    p_corr.add_argument("--subset", choices=SUBSETS, default="all")
    p_corr.add_argument("--features", type=Path, help="feature-table file")
    p_corr.add_argument("--classes", type=Path, help="class-table file")

    p_near = sub.add_parser("nearest", parents=[shared], help="nearest neighbors by JSD")
    p_near.add_argument("-k", type=int, default=5)
    p_near.add_argument("--category", help="single query category (default: all)")

    p_rep = sub.add_parser("report", parents=[shared], help="consolidated JSON report")
    p_rep.add_argument("--features", type=Path)
    p_rep.add_argument("--classes", type=Path)
    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("PHONEDIST_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(message)s")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    config = load_run_config(args.config) if args.config else RunConfig()
    if args.output is not None:
        config.output_dir = args.output
    if args.model is not None:
        config.model_id = args.model
    for attr, key in [
        ("units", "units_path"),
        ("alignments", "alignments_path"),
        ("mapping", "mapping_path"),
        ("features", "features_path"),
        ("classes", "classes_path"),
    ]:
        value = getattr(args, attr, None)
        if value is not None:
            setattr(config, key, value)
    return config


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "ingest":
            diag = cmd_ingest(config)
            diag.print(sys.stdout)
        elif args.command == "entropy":
            print(cmd_entropy(config))
        elif args.command == "divergence":
            print(cmd_divergence(config))
        elif args.command == "cluster":
            for path in cmd_cluster(config):
                print(path)
        elif args.command == "correlate":
            print(cmd_correlate(config, subset=args.subset))
        elif args.command == "nearest":
            print(cmd_nearest(config, k=args.k, category=args.category))
        elif args.command == "report":
            print(cmd_report(config))
    except MissingExport as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except PhonedistError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
