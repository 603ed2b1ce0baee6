"""Labeled flow datasets: CSV persistence, train/test split, composition stats.

The interchange format is a plain CSV with the fixed header
``TotPkts,TotBytes,SrcPkts,DstPkts,SrcBytes,Sport,Label,AttackKind``
(UTF-8, LF line endings, decimal integers).  Provenance (scenario
config hash + seed) travels in a small JSON sidecar next to the CSV.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .attacks import AttackKind
from .flows import LABEL_ATTACK, LABEL_NORMAL, FeatureVector, LabeledFlow

SCHEMA_VERSION = "1"
CSV_HEADER = "TotPkts,TotBytes,SrcPkts,DstPkts,SrcBytes,Sport,Label,AttackKind"


class SchemaMismatchError(ValueError):
    pass


class MalformedRowError(ValueError):
    def __init__(self, row_index: int, message: str):
        super().__init__(f"row {row_index}: {message}")
        self.row_index = row_index


class ClassTooSmallError(ValueError):
    pass


@dataclass
class Dataset:
    rows: list[LabeledFlow] = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION
    provenance: str = ""

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must be in (0, 1)")


def _row_line(row: LabeledFlow) -> str:
    f = row.features
    kind = row.attack_kind.value if row.attack_kind is not None else ""
    return (
        f"{f.tot_pkts},{f.tot_bytes},{f.src_pkts},{f.dst_pkts},{f.src_bytes},"
        f"{f.sport},{row.label},{kind}"
    )


def write_csv(dataset: Dataset, path):
    path = Path(path)
    lines = [CSV_HEADER]
    lines.extend(_row_line(row) for row in dataset.rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    meta = {"schema_version": dataset.schema_version, "provenance": dataset.provenance}
    path.with_suffix(path.suffix + ".meta.json").write_text(
        json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_csv(path) -> Dataset:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise SchemaMismatchError(f"expected header {CSV_HEADER!r}")
    rows = []
    for index, line in enumerate(lines[1:], start=1):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise MalformedRowError(index, f"expected 8 columns, got {len(parts)}")
        try:
            counts = [int(p) for p in parts[:6]]
        except ValueError as exc:
            raise MalformedRowError(index, str(exc)) from None
        if any(c < 0 for c in counts):
            raise MalformedRowError(index, "negative count")
        label_value = parts[6]
        if label_value not in (LABEL_NORMAL, LABEL_ATTACK):
            raise MalformedRowError(index, f"unknown label {label_value!r}")
        kind = None
        if parts[7]:
            try:
                kind = AttackKind(parts[7])
            except ValueError:
                raise MalformedRowError(index, f"unknown attack kind {parts[7]!r}") from None
        rows.append(LabeledFlow(FeatureVector(*counts), label_value, kind))
    meta_path = path.with_suffix(path.suffix + ".meta.json")
    schema_version, provenance = SCHEMA_VERSION, ""
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        schema_version = meta.get("schema_version", SCHEMA_VERSION)
        provenance = meta.get("provenance", "")
    return Dataset(rows, schema_version, provenance)


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Disjoint, exhaustive train/test partition, deterministic per seed.

    Stratified mode preserves each label's proportion within one row:
    per-class floors of ``train_fraction * n_class``, with the leftover
    train slots going to the classes with the largest fractional
    remainders.  Non-stratified mode splits in time order.
    """
    n = len(dataset.rows)
    if n == 0:
        raise ClassTooSmallError("cannot split an empty dataset")
    if not spec.stratified:
        cut = int(n * spec.train_fraction)
        return (
            Dataset(dataset.rows[:cut], dataset.schema_version, dataset.provenance),
            Dataset(dataset.rows[cut:], dataset.schema_version, dataset.provenance),
        )

    by_label: dict[str, list[int]] = {LABEL_NORMAL: [], LABEL_ATTACK: []}
    for i, row in enumerate(dataset.rows):
        by_label[row.label].append(i)
    for label_value, indices in by_label.items():
        if not indices:
            raise ClassTooSmallError(f"no rows with label {label_value!r}")

    total_train = int(n * spec.train_fraction + 0.5)
    quotas = {lv: spec.train_fraction * len(ix) for lv, ix in by_label.items()}
    takes = {lv: int(q) for lv, q in quotas.items()}
    leftover = total_train - sum(takes.values())
    for lv in sorted(quotas, key=lambda lv: quotas[lv] - takes[lv], reverse=True):
        if leftover <= 0:
            break
        takes[lv] += 1
        leftover -= 1

    rng = random.Random(spec.seed)
    train_idx, test_idx = [], []
    for lv in (LABEL_NORMAL, LABEL_ATTACK):
        indices = list(by_label[lv])
        rng.shuffle(indices)
        take = takes[lv]
        if take == 0 or take == len(indices):
            raise ClassTooSmallError(f"class {lv!r} too small for a {spec.train_fraction} split")
        train_idx.extend(indices[:take])
        test_idx.extend(indices[take:])
    train_idx.sort()
    test_idx.sort()
    train = Dataset([dataset.rows[i] for i in train_idx], dataset.schema_version, dataset.provenance)
    test = Dataset([dataset.rows[i] for i in test_idx], dataset.schema_version, dataset.provenance)
    return train, test


def stats(dataset: Dataset) -> dict:
    """Class and attack-kind composition, mirroring a capture summary table."""
    n = len(dataset.rows)
    normal = sum(1 for r in dataset.rows if r.label == LABEL_NORMAL)
    attacks = n - normal
    by_kind: dict[str, int] = {}
    for row in dataset.rows:
        if row.attack_kind is not None:
            by_kind[row.attack_kind.value] = by_kind.get(row.attack_kind.value, 0) + 1
    pct = (lambda c: 100.0 * c / n) if n else (lambda c: 0.0)
    first = min((r.record.first_ts for r in dataset.rows if r.record), default=0.0)
    last = max((r.record.last_ts for r in dataset.rows if r.record), default=0.0)
    return {
        "total_rows": n,
        "empty": n == 0,
        "normal_count": normal,
        "attack_count": attacks,
        "normal_pct": pct(normal),
        "attack_pct": pct(attacks),
        "by_kind_count": by_kind,
        "by_kind_pct": {k: pct(c) for k, c in sorted(by_kind.items())},
        "duration": max(last - first, 0.0),
    }
