"""CSV and JSON formats.

Sample and table files are UTF-8, comma separated, with a required header.
Lines starting with ``#`` are comments. Four schemas are recognised:

=============== =========================================================
binary_samples  ``a,y,rhat``
dp_samples      ``a,y,r0,r1``
score_samples   ``a,y,r``
fico_cdf        ``score,cdf_a0,cdf_a1,nondefault_a0,nondefault_a1``
=============== =========================================================

Canonical output writes floats with 17 significant digits, so
parse -> emit -> parse is lossless.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .binary import PostProcessPolicy
from .distributions import (
    BinaryJointPMF,
    CounterfactualModel,
    ScoreModel,
    estimate_binary_pmf,
    estimate_counterfactual_model,
    estimate_score_model,
    score_model_from_cdf_table,
)
from .dp import DPPolicy
from .errors import IngestError, SeqFairError

SCHEMAS = {
    "binary_samples": ("a", "y", "rhat"),
    "dp_samples": ("a", "y", "r0", "r1"),
    "score_samples": ("a", "y", "r"),
    "fico_cdf": ("score", "cdf_a0", "cdf_a1", "nondefault_a0", "nondefault_a1"),
}
BINARY_COLUMNS = {"a", "y", "rhat"}


@dataclass(frozen=True)
class DatasetManifest:
    """Where a dataset lives and how to read it.

    ``support`` is the declared score support for score formats (defaults to
    the sorted distinct values present). ``group_prior`` overrides Pr{A=0}
    for CDF tables; ``group_counts`` gives it as raw group sizes instead.
    """

    path: Path
    format: str
    support: tuple[float, ...] | None = None
    group_prior: float | None = None
    group_counts: tuple[int, int] | None = None
    smoothing: float = 0.0

    def __post_init__(self):
        if self.format not in SCHEMAS:
            raise IngestError(f"unknown format {self.format!r}; expected one of {sorted(SCHEMAS)}")
        object.__setattr__(self, "path", Path(self.path))

    @classmethod
    def from_json(cls, path) -> DatasetManifest:
        path = Path(path)
        try:
            d = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise IngestError(f"cannot read manifest: {e}", path=path) from e
        unknown = set(d) - {"path", "format", "support", "group_prior", "group_counts", "smoothing"}
        if unknown or "path" not in d or "format" not in d:
            raise IngestError(f"manifest needs path and format (unknown keys: {sorted(unknown)})", path=path)
        data = Path(d["path"])
        if not data.is_absolute():
            data = path.parent / data
        return cls(
            data,
            d["format"],
            tuple(d["support"]) if d.get("support") is not None else None,
            d.get("group_prior"),
            tuple(d["group_counts"]) if d.get("group_counts") is not None else None,
            float(d.get("smoothing", 0.0)),
        )

    def prior_a0(self) -> float | None:
        if self.group_prior is not None:
            return float(self.group_prior)
        if self.group_counts is not None:
            n0, n1 = self.group_counts
            return n0 / (n0 + n1)
        return None


@dataclass(frozen=True)
class Table:
    format: str
    header: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    lines: tuple[int, ...]


def _parse_value(text: str, column: str, line: int, path) -> float:
    try:
        v = float(text)
    except ValueError:
        raise IngestError(f"column {column}: {text!r} is not a number", row=line, path=path) from None
    if not math.isfinite(v):
        raise IngestError(f"column {column}: non-finite value {text!r}", row=line, path=path)
    if column in BINARY_COLUMNS and v not in (0.0, 1.0):
        raise IngestError(f"column {column}: {text!r} is not 0 or 1", row=line, path=path)
    if column != "score" and v < 0:
        raise IngestError(f"column {column}: negative value {text!r}", row=line, path=path)
    return v


def parse_text(text: str, fmt: str, path=None) -> Table:
    """Parse CSV text against the schema ``fmt``; errors carry 1-based line numbers."""
    expected = SCHEMAS[fmt]
    header = None
    rows, lines = [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if header is None:
            header = tuple(cells)
            if header != expected:
                raise IngestError(
                    f"header {','.join(header)!r} does not match {fmt} schema {','.join(expected)!r}",
                    row=line_no,
                    path=path,
                )
            continue
        if len(cells) != len(expected):
            raise IngestError(f"expected {len(expected)} fields, got {len(cells)}", row=line_no, path=path)
        rows.append(tuple(_parse_value(c, col, line_no, path) for c, col in zip(cells, expected)))
        lines.append(line_no)
    if header is None:
        raise IngestError("missing header", path=path)
    if not rows:
        raise IngestError("no data rows", path=path)
    return Table(fmt, header, tuple(rows), tuple(lines))


def parse(manifest: DatasetManifest) -> Table:
    try:
        text = manifest.path.read_text(encoding="utf-8")
    except OSError as e:
        raise IngestError(f"cannot read data file: {e}", path=manifest.path) from e
    return parse_text(text, manifest.format, manifest.path)


def _relocate(err: IngestError, table: Table, path) -> IngestError:
    # estimators report 0-based sample indices; map them back to file lines
    row = table.lines[err.row] if err.row is not None and err.row < len(table.lines) else err.row
    msg = str(err).split(": ", 1)[-1] if err.row is not None else str(err)
    return IngestError(msg, row=row, path=path)


def build(table: Table, manifest: DatasetManifest):
    """Turn a parsed table into the matching probability model."""
    rows = table.rows
    try:
        if table.format == "binary_samples":
            return estimate_binary_pmf(
                ((int(a), int(r), int(y)) for a, y, r in rows), smoothing=manifest.smoothing
            )
        if table.format == "dp_samples":
            support = manifest.support or sorted({r for row in rows for r in row[2:]} | {0.0, 1.0})
            return estimate_counterfactual_model(
                ((int(a), int(y), r0, r1) for a, y, r0, r1 in rows), support, manifest.smoothing
            )
        if table.format == "score_samples":
            support = manifest.support or sorted({r for *_, r in rows})
            return estimate_score_model(
                ((int(a), int(y), r) for a, y, r in rows), support, manifest.smoothing
            )
        prior = manifest.prior_a0()
        if prior is None:
            raise IngestError("fico_cdf needs group_prior or group_counts in the manifest")
        arr = np.array(rows)
        for a, col in ((0, 3), (1, 4)):
            over = np.nonzero(arr[:, col] > 1)[0]
            if over.size:
                raise IngestError(f"nondefault_a{a} exceeds 1", row=int(over[0]))
        return score_model_from_cdf_table(arr[:, 0], arr[:, 1:3].T, arr[:, 3:5].T, prior)
    except IngestError as e:
        raise _relocate(e, table, manifest.path) from e


def load(manifest: DatasetManifest):
    """Read, validate and estimate: returns a BinaryJointPMF, CounterfactualModel or ScoreModel."""
    return build(parse(manifest), manifest)


def load_path(path, fmt: str | None = None, **kw):
    """Convenience: a ``.json`` path is a manifest, anything else a CSV of format ``fmt``."""
    path = Path(path)
    if path.suffix == ".json":
        return load(DatasetManifest.from_json(path))
    if fmt is None:
        fmt = sniff_format(path)
    return load(DatasetManifest(path, fmt, **kw))


def sniff_format(path) -> str:
    """Pick the schema whose header matches the first non-comment line."""
    try:
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if line and not line.startswith("#"):
                    header = tuple(c.strip() for c in line.split(","))
                    break
            else:
                raise IngestError("empty file", path=path)
    except OSError as e:
        raise IngestError(f"cannot read data file: {e}", path=path) from e
    for fmt, cols in SCHEMAS.items():
        if cols == header:
            return fmt
    raise IngestError(f"header {','.join(header)!r} matches no known schema", row=1, path=path)


def _fmt(v: float, column: str) -> str:
    if column in BINARY_COLUMNS:
        return str(int(v))
    return format(v, ".17g")


def emit_text(table: Table) -> str:
    """Canonical CSV: header, then one line per row, 17 significant digits."""
    out = io.StringIO()
    out.write(",".join(table.header) + "\n")
    for row in table.rows:
        out.write(",".join(_fmt(v, c) for v, c in zip(row, table.header)) + "\n")
    return out.getvalue()


def emit(table: Table, path) -> None:
    Path(path).write_text(emit_text(table), encoding="utf-8")


# ---------------------------------------------------------------------------
# JSON for models, policies and outcomes


def model_to_dict(model) -> dict:
    if isinstance(model, BinaryJointPMF):
        return {"kind": "binary_pmf", "p": model.p.tolist()}
    if isinstance(model, ScoreModel):
        return {
            "kind": "score_model",
            "support": model.support.tolist(),
            "prior": model.prior.tolist(),
            "cond": model.cond.tolist(),
        }
    if isinstance(model, CounterfactualModel):
        return {"kind": "counterfactual_model", "support": model.support.tolist(), "table": model.table.tolist()}
    raise TypeError(f"not a model: {type(model).__name__}")


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "binary_pmf":
        return BinaryJointPMF(np.array(d["p"]))
    if kind == "score_model":
        return ScoreModel(np.array(d["support"]), np.array(d["prior"]), np.array(d["cond"]))
    if kind == "counterfactual_model":
        return CounterfactualModel(np.array(d["table"]), np.array(d["support"]))
    raise IngestError(f"unknown model kind {kind!r}")


def policy_from_dict(d: dict):
    try:
        if "alpha" in d:
            return PostProcessPolicy.from_dict(d)
        if "beta" in d:
            return DPPolicy.from_dict(d)
    except KeyError as e:
        raise IngestError(f"policy JSON is missing key {e}") from None
    except SeqFairError as e:
        raise IngestError(str(e)) from None
    raise IngestError('policy JSON needs an "alpha" or "beta" object')


def read_policy(path):
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise IngestError(f"cannot read policy: {e}", path=path) from e
    return policy_from_dict(d)


def dumps(obj) -> str:
    """Deterministic JSON (sorted keys, shortest round-trip floats, inf as string)."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x
