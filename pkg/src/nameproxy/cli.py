"""Command-line pipeline: build-tables, train, predict, evaluate, sample.

Every command takes ``--config`` (JSON, see :mod:`nameproxy.config`) plus
its own flags, and is deterministic given the config's seeds: re-running
a command with the same inputs produces byte-identical outputs.

Exit codes: 0 success, 1 validation error, 2 IO error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bayes import BayesContext, bifsg_reason, bisg_reason, geo_augment_reason
from .config import RunConfig, load_config
from .core import PersonRecord, RaceSet, argmax_race
from .ensemble import ensemble_predict
from .errors import (
    EmptyAfterNormalizationError,
    MissingArtifactError,
    NameproxyError,
    SchemaError,
)
from .evaluation import class_metrics, emit_report, intersect_covered, roc_curve
from .lstm import (
    load_params,
    predict_proba_batch,
    save_params,
    train,
    write_training_log,
)
from .names import NEURAL, encode_name, is_person_name, normalize, normalize_table
from .sampling import representative_sample_indices
from .tables import (
    EXTERNAL,
    FIRSTNAME,
    INTERNAL,
    SURNAME,
    GeoTable,
    NameTable,
    build_geo_table,
    build_name_table,
    merge_tables,
)

logger = logging.getLogger(__name__)

VOTER_HEADER = ["first_name", "last_name", "geo_id", "race"]
MODEL_CHOICES = ("first_last", "first_last_zcta", "bisg", "bifsg", "ensemble")

#: Ensemble member ids may name the improved (merged-table) variants; they
#: run the same machinery, the tables in the config decide the rest.
MEMBER_ALIASES = {"ibisg": "bisg", "ibifsg": "bifsg"}


def read_people_csv(path, races: RaceSet, require_race: bool) -> list[PersonRecord]:
    """Ingest a ``first_name,last_name,geo_id,race`` CSV with row validation."""
    records: list[PersonRecord] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != VOTER_HEADER:
            raise SchemaError(f"{path}: expected header {VOTER_HEADER}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise SchemaError(f"{path}: line {lineno}: expected 4 fields, got {len(row)}")
            first, last, geo, race = row
            if not first or not last:
                raise SchemaError(f"{path}: line {lineno}: empty name field")
            if race == "":
                if require_race:
                    raise SchemaError(f"{path}: line {lineno}: missing race")
                race = None
            elif race not in races:
                raise SchemaError(f"{path}: line {lineno}: unknown race {race!r}")
            records.append(PersonRecord(first, last, geo, race))
    if not records:
        raise SchemaError(f"{path}: no data rows")
    return records


def write_people_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(VOTER_HEADER)
        for rec in records:
            writer.writerow([rec.first, rec.last, rec.geo, rec.race or ""])


@dataclass
class Artifacts:
    """Lazily loaded tables and parameters, resolved from config paths."""

    config: RunConfig
    _cache: dict = None

    def __post_init__(self):
        self._cache = {}

    def _load(self, key, loader):
        if key not in self._cache:
            path = self.config.path(key)
            if path is None:
                raise MissingArtifactError(
                    f"config paths.{key} is required for the requested model"
                )
            self._cache[key] = loader(path)
        return self._cache[key]

    @property
    def params(self):
        return self._load("params", load_params)

    @property
    def surname_table(self) -> NameTable:
        table = self._load("surname_table", NameTable.load)
        table.smoothing_alpha = self.config.smoothing_alpha
        return table

    @property
    def firstname_table(self) -> NameTable:
        return self._load("firstname_table", NameTable.load)

    @property
    def geo_table(self) -> GeoTable:
        return self._load("geo_table", GeoTable.load)

    def bayes_context(self, with_firstname: bool) -> BayesContext:
        return BayesContext(
            surname_table=self.surname_table,
            geo_table=self.geo_table,
            firstname_table=self.firstname_table if with_firstname else None,
            suffixes=self.config.suffixes,
        )


def _neural_probs(artifacts: Artifacts, records) -> list[np.ndarray | None]:
    """Name-model probabilities per record; unencodable names decline."""
    encoded = []
    slots = []
    for i, rec in enumerate(records):
        try:
            first = normalize(rec.first, NEURAL)
            last = normalize(rec.last, NEURAL)
            encoded.append(encode_name(first, last))
            slots.append(i)
        except EmptyAfterNormalizationError:
            continue
    out: list[np.ndarray | None] = [None] * len(records)
    if encoded:
        probs = predict_proba_batch(artifacts.params, np.stack(encoded))
        for slot, vec in zip(slots, probs):
            out[slot] = vec
    return out


def predict_model(model: str, records, artifacts: Artifacts, config: RunConfig):
    """Probability vectors (or None) for every record under one model."""
    model = MEMBER_ALIASES.get(model, model)
    if model == "first_last":
        return _neural_probs(artifacts, records)
    if model == "first_last_zcta":
        name_probs = _neural_probs(artifacts, records)
        geo_table = artifacts.geo_table
        out = []
        for rec, probs in zip(records, name_probs):
            if probs is None:
                out.append(None)
                continue
            vec, _ = geo_augment_reason(
                probs, geo_table.geo_likelihood(rec.geo), config.races
            )
            out.append(vec)
        return out
    if model == "bisg":
        ctx = artifacts.bayes_context(with_firstname=False)
        return [bisg_reason(ctx, rec.last, rec.geo)[0] for rec in records]
    if model == "bifsg":
        ctx = artifacts.bayes_context(with_firstname=True)
        return [
            bifsg_reason(ctx, rec.first, rec.last, rec.geo)[0] for rec in records
        ]
    if model == "ensemble":
        spec = config.ensemble
        member_outputs = [
            predict_model(member, records, artifacts, config)
            for member in spec.members
        ]
        return [
            ensemble_predict([outputs[i] for outputs in member_outputs], spec)
            for i in range(len(records))
        ]
    raise ValueError(f"unknown model {model!r}")


def prediction_header(races: RaceSet) -> list[str]:
    return ["row_id", "model"] + [f"p_{r}" for r in races] + ["max_race", "covered"]


def cmd_build_tables(args, config: RunConfig) -> int:
    records = read_people_csv(args.voter, config.races, require_race=True)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest: dict = {
        "records": len(records),
        "per_race": {
            race: sum(1 for r in records if r.race == race) for race in config.races
        },
        "seed": config.seed,
        "target_shares": list(config.target_shares) if config.target_shares else None,
    }

    for kind, external_path, prefer in (
        (SURNAME, args.external_surname, EXTERNAL),
        (FIRSTNAME, args.external_firstname, INTERNAL),
    ):
        table = build_name_table(
            records,
            kind,
            seed=config.seed,
            target_shares=config.target_shares,
            races=config.races,
            suffixes=config.suffixes,
        )
        distinct = set()
        field = "last" if kind == SURNAME else "first"
        for rec in records:
            try:
                name = normalize_table(getattr(rec, field), config.suffixes)
            except EmptyAfterNormalizationError:
                continue
            if len(name) > 1:
                distinct.add(name)
        stats = {
            "distinct_names": len(distinct),
            "kept_internal": len(table),
            "suppressed": len(distinct) - len(table),
            "external_file": str(external_path) if external_path else None,
        }
        if external_path:
            external = NameTable.from_probability_csv(external_path, kind, config.races)
            table = merge_tables(table, external, prefer=prefer)
            stats["kept_merged"] = len(table)
        path = out_dir / f"{kind}_table.csv"
        table.save(path)
        stats["path"] = str(path)
        manifest[kind] = stats

    geo_table = build_geo_table(records, config.races)
    geo_path = out_dir / "geo_table.csv"
    geo_table.save(geo_path)
    manifest["geo"] = {"entries": len(geo_table), "path": str(geo_path)}

    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    logger.info("wrote tables and manifest under %s", out_dir)
    return 0


def cmd_train(args, config: RunConfig) -> int:
    records = read_people_csv(args.voter, config.races, require_race=True)
    cfg = config.train_config()
    params, log = train(records, cfg, races=config.races)
    save_params(params, args.out_params)
    write_training_log(log, args.out_log)
    logger.info(
        "trained %d epochs, best validation accuracy %.4f",
        len(log),
        max(row.val_accuracy for row in log),
    )
    return 0


def _parse_models(spec: str) -> list[str]:
    models = [m.strip() for m in spec.split(",") if m.strip()]
    if not models:
        raise SchemaError("no models requested")
    for model in models:
        if MEMBER_ALIASES.get(model, model) not in MODEL_CHOICES:
            raise SchemaError(
                f"unknown model {model!r}; choose from {', '.join(MODEL_CHOICES)}"
            )
    return models


def cmd_predict(args, config: RunConfig) -> int:
    records = read_people_csv(args.input, config.races, require_race=False)
    models = _parse_models(args.models)
    artifacts = Artifacts(config)
    outputs = {model: predict_model(model, records, artifacts, config) for model in models}
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(prediction_header(config.races))
        for i in range(len(records)):
            for model in models:
                probs = outputs[model][i]
                if probs is None:
                    row = [i, model] + [""] * len(config.races) + ["", 0]
                else:
                    row = (
                        [i, model]
                        + [repr(float(p)) for p in probs]
                        + [argmax_race(probs, config.races), 1]
                    )
                writer.writerow(row)
    logger.info("wrote predictions for %d records x %d models", len(records), len(models))
    return 0


class _Unseen:
    pass


_UNSEEN = _Unseen()


def read_predictions_csv(path, races: RaceSet, n_rows: int):
    """Parse a predictions file into {model: [probs or None] * n_rows}."""
    expected = prediction_header(races)
    by_model: dict[str, list] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != expected:
            raise SchemaError(f"{path}: expected header {expected}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise SchemaError(f"{path}: line {lineno}: wrong field count")
            try:
                row_id = int(row[0])
            except ValueError as exc:
                raise SchemaError(f"{path}: line {lineno}: bad row_id") from exc
            model = row[1]
            if not 0 <= row_id < n_rows:
                raise SchemaError(
                    f"{path}: line {lineno}: row_id {row_id} outside truth file"
                )
            slots = by_model.setdefault(model, [_UNSEEN] * n_rows)
            covered = row[-1]
            if covered not in ("0", "1"):
                raise SchemaError(f"{path}: line {lineno}: covered must be 0 or 1")
            if covered == "1":
                try:
                    probs = np.array([float(v) for v in row[2:-2]], dtype=np.float64)
                except ValueError as exc:
                    raise SchemaError(f"{path}: line {lineno}: bad probability") from exc
                slots[row_id] = probs
            else:
                slots[row_id] = None
    for model, slots in by_model.items():
        missing = sum(1 for s in slots if s is _UNSEEN)
        if missing:
            raise SchemaError(
                f"{path}: model {model!r} is missing {missing} of {n_rows} row_ids"
            )
    return by_model


def _require_sample_shares(config: RunConfig):
    if config.sample_shares is None:
        raise SchemaError("config sample_shares is required for stratified sampling")
    return config.sample_shares


def cmd_evaluate(args, config: RunConfig) -> int:
    truth = read_people_csv(args.truth, config.races, require_race=True)
    all_models: dict[str, list] = {}
    for path in args.predictions:
        parsed = read_predictions_csv(path, config.races, len(truth))
        for model, slots in parsed.items():
            if model in all_models:
                raise SchemaError(f"model {model!r} appears in more than one file")
            all_models[model] = slots
    if not all_models:
        raise SchemaError("prediction files contained no models")

    indices = list(range(len(truth)))
    if args.sample is not None:
        indices = representative_sample_indices(
            truth,
            args.sample,
            _require_sample_shares(config),
            seed=config.seed,
            races=config.races,
        )
    if args.intersect_covered:
        keep = set(
            intersect_covered([[all_models[m][i] for i in indices] for m in all_models])
        )
        indices = [i for pos, i in enumerate(indices) if pos in keep]
        if not indices:
            logger.warning("covered-subset intersection is empty; metrics undefined")

    truths = [truth[i].race for i in indices]
    reports = {}
    rocs = {}
    for model, slots in all_models.items():
        probs = [slots[i] for i in indices]
        labels = [
            argmax_race(p, config.races) if p is not None else None for p in probs
        ]
        reports[model] = class_metrics(
            truths, labels, config.races, strict=config.strict_metrics
        )
        covered_truths = [t for t, p in zip(truths, probs) if p is not None]
        covered_probs = [p for p in probs if p is not None]
        curves = {}
        for race in config.races:
            try:
                curves[race] = roc_curve(covered_truths, covered_probs, race, config.races)
            except NameproxyError as exc:
                logger.warning("skipping ROC for %s/%s: %s", model, race, exc)
        rocs[model] = curves
    written = emit_report(reports, rocs, args.out_dir)
    logger.info("wrote %d report files under %s", len(written), args.out_dir)
    return 0


def cmd_sample(args, config: RunConfig) -> int:
    records = read_people_csv(args.input, config.races, require_race=True)
    kept = [
        rec
        for rec in records
        if is_person_name(f"{rec.first} {rec.last}", config.filter_words)
    ]
    seen = set()
    unique = []
    for rec in kept:
        key = (rec.first, rec.last, rec.geo)
        if key not in seen:
            seen.add(key)
            unique.append(rec)
    indices = representative_sample_indices(
        unique, args.n, _require_sample_shares(config), seed=config.seed, races=config.races
    )
    write_people_csv([unique[i] for i in indices], args.out)
    logger.info(
        "filtered %d -> %d person rows, %d unique, sampled %d",
        len(records),
        len(kept),
        len(unique),
        len(indices),
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nameproxy",
        description="Race/ethnicity proxy models from names and geography.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-tables", help="build name and geography tables")
    p.add_argument("--config", required=True)
    p.add_argument("--voter", required=True, help="voter-style CSV with race")
    p.add_argument("--external-surname", help="external surname probability CSV")
    p.add_argument("--external-firstname", help="external first-name probability CSV")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_build_tables)

    p = sub.add_parser("train", help="train the character-level name model")
    p.add_argument("--config", required=True)
    p.add_argument("--voter", required=True)
    p.add_argument("--out-params", required=True)
    p.add_argument("--out-log", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a CSV with one or more models")
    p.add_argument("--config", required=True)
    p.add_argument("--input", required=True)
    p.add_argument(
        "--models",
        default="ensemble",
        help=f"comma-separated subset of: {', '.join(MODEL_CHOICES)}",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score prediction files against truth")
    p.add_argument("--config", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--predictions", nargs="+", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--sample", type=int, help="representative sample size")
    p.add_argument(
        "--intersect-covered",
        action="store_true",
        help="restrict to records every model covered",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sample", help="filter, dedupe, and stratify a raw CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("NAMEPROXY_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except OSError as exc:
        print(f"nameproxy: io error: {exc}", file=sys.stderr)
        return 2
    except (NameproxyError, ValueError) as exc:
        print(f"nameproxy: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
