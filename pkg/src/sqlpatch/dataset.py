"""Synthesis of error-correction examples from parser beam outputs.

Beam entries that fail to parse (or to execute, when a backend is present)
are dropped; surviving entries are labeled wrong under the configured
policy and serialized into (x, y) training pairs for every requested
representation combination.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from .clausemap import decompose
from .diffs import diff_clauses_pydict, diff_clauses_sql, diff_program, diff_tokens
from .editscript import render_edits
from .errors import DatasetError, ExecutionError, SqlPatchError
from .metrics import EvalOutcome, ExecBackend, exact_set_match, execution_match
from .parse import parse_sql
from .program import render_program
from .pydict import render_pydict
from .render import render
from .schema import SchemaInfo

QUERY_REPS = ("sql", "pydict")
EDIT_REPS = ("token", "clause", "program")
REP_COMBOS = (("sql", "token"), ("sql", "clause"),
              ("pydict", "clause"), ("pydict", "program"))
POLICIES = ("either", "both")

X_SEPARATOR = " | "
Y_SEPARATOR = " <sep> "


@dataclass(frozen=True)
class ParserOutput:
    db_id: str
    question: str
    gold_sql: str
    beam: tuple[tuple[str, float], ...]  # (sql, score), highest score first

    def __post_init__(self):
        if not self.beam:
            raise DatasetError("beam must be non-empty")
        scores = [score for _, score in self.beam]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise DatasetError("beam scores must be non-increasing")

    @staticmethod
    def from_json(line: str) -> "ParserOutput":
        obj = json.loads(line)
        return ParserOutput(
            db_id=obj["db_id"],
            question=obj["question"],
            gold_sql=obj["gold_sql"],
            beam=tuple((e["sql"], float(e["score"])) for e in obj["beam"]),
        )

    def to_json(self) -> str:
        return json.dumps({
            "db_id": self.db_id, "question": self.question, "gold_sql": self.gold_sql,
            "beam": [{"sql": s, "score": v} for s, v in self.beam],
        }, ensure_ascii=False)


@dataclass(frozen=True)
class ExampleRecord:
    db_id: str
    question: str
    schema_serial: str
    wrong_sql: str  # canonical SQL of the wrong parse
    gold_sql: str   # canonical SQL of the gold query
    query_rep: str  # sql | pydict
    edit_rep: str   # token | clause | program
    x: str
    y: str
    n_edits: int
    beam_rank: int
    beam_score: float

    @staticmethod
    def from_json(line: str) -> "ExampleRecord":
        return ExampleRecord(**json.loads(line))

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False)


def read_parser_outputs(lines: Iterable[str]) -> list[ParserOutput]:
    return [ParserOutput.from_json(line) for line in lines if line.strip()]


def read_records(lines: Iterable[str]) -> list[ExampleRecord]:
    return [ExampleRecord.from_json(line) for line in lines if line.strip()]


# ---------------------------------------------------------------------------
# Fold splitting


def split_folds(outputs: list[ParserOutput], k: int) -> list[list[ParserOutput]]:
    """Partition by database into k folds, greedily balancing example
    counts: largest database first into the currently smallest fold."""
    if k < 2:
        raise DatasetError("fold count must be at least 2")
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    for i, out in enumerate(outputs):
        counts[out.db_id] = counts.get(out.db_id, 0) + 1
        first_seen.setdefault(out.db_id, i)
    if len(counts) < k:
        raise DatasetError(f"need at least {k} distinct databases, got {len(counts)}")
    order = sorted(counts, key=lambda db: (-counts[db], first_seen[db]))
    fold_of: dict[str, int] = {}
    sizes = [0] * k
    for db in order:
        target = min(range(k), key=lambda i: (sizes[i], i))
        fold_of[db] = target
        sizes[target] += counts[db]
    folds: list[list[ParserOutput]] = [[] for _ in range(k)]
    for out in outputs:
        folds[fold_of[out.db_id]].append(out)
    return folds


# ---------------------------------------------------------------------------
# Example synthesis


def synthesize_train(outputs: list[ParserOutput], schemas: dict[str, SchemaInfo],
                     backend: Optional[ExecBackend] = None, policy: str = "either",
                     reps=REP_COMBOS, program_only: bool = False) -> list[ExampleRecord]:
    if policy not in POLICIES:
        raise DatasetError(f"unknown wrongness policy {policy!r}")
    records: list[ExampleRecord] = []
    for output in outputs:
        schema = schemas.get(output.db_id)
        if schema is None:
            raise DatasetError(f"schema missing for db_id {output.db_id!r}")
        try:
            gold_ast = parse_sql(output.gold_sql, schema)
        except SqlPatchError as exc:
            raise DatasetError(
                f"gold query does not parse for {output.db_id!r}: {exc}") from None
        gold_sql = render(gold_ast)
        seen: set[str] = set()
        for rank, (beam_sql, score) in enumerate(output.beam):
            try:
                ast = parse_sql(beam_sql, schema)
            except SqlPatchError:
                continue  # ungrammatical parses never enter the data
            wrong_sql = render(ast)
            if wrong_sql in seen:
                continue
            seen.add(wrong_sql)
            if backend is not None:
                try:
                    backend.execute(wrong_sql, output.db_id)
                except ExecutionError:
                    continue  # non-executable parses are dropped too
            outcome = _evaluate(ast, gold_ast, wrong_sql, gold_sql, output.db_id, backend)
            if not _is_wrong(outcome, policy):
                continue
            for query_rep, edit_rep in reps:
                record = make_record(output, rank, score, schema, ast, gold_ast,
                                     query_rep, edit_rep, program_only)
                if record is not None:
                    records.append(record)
    return records


def _evaluate(ast, gold_ast, wrong_sql, gold_sql, db_id, backend) -> EvalOutcome:
    em = exact_set_match(ast, gold_ast)
    ex = None
    if backend is not None:
        ex = execution_match(wrong_sql, gold_sql, db_id, backend)
    return EvalOutcome(em, ex)


def _is_wrong(outcome: EvalOutcome, policy: str) -> bool:
    if outcome.ex is None:
        return not outcome.em
    if policy == "either":
        return (not outcome.em) or (not outcome.ex)
    return (not outcome.em) and (not outcome.ex)


def make_record(output: ParserOutput, rank: int, score: float, schema: SchemaInfo,
                wrong_ast, gold_ast, query_rep: str, edit_rep: str,
                program_only: bool = False) -> Optional[ExampleRecord]:
    """Build one ExampleRecord, or None when the pair has no edits."""
    edits_text, n_edits = render_edit_target(wrong_ast, gold_ast, query_rep, edit_rep)
    if n_edits == 0:
        return None
    x, y = serialize_example(output.question, schema.serialize(), wrong_ast, gold_ast,
                             query_rep, edit_rep, program_only, edits_text=edits_text)
    return ExampleRecord(
        db_id=output.db_id, question=output.question,
        schema_serial=schema.serialize(),
        wrong_sql=render(wrong_ast), gold_sql=render(gold_ast),
        query_rep=query_rep, edit_rep=edit_rep, x=x, y=y,
        n_edits=n_edits, beam_rank=rank, beam_score=score,
    )


def render_edit_target(wrong_ast, gold_ast, query_rep: str, edit_rep: str):
    """Rendered edit text plus the action/statement count for one rep combo."""
    if query_rep not in QUERY_REPS or edit_rep not in EDIT_REPS:
        raise DatasetError(f"unknown representation {query_rep!r}/{edit_rep!r}")
    if edit_rep == "program":
        if query_rep != "pydict":
            raise DatasetError("program edits require the pydict query representation")
        program = diff_program(decompose(wrong_ast), decompose(gold_ast))
        return render_program(program), len(program)
    if edit_rep == "token":
        if query_rep != "sql":
            raise DatasetError("token edits require the sql query representation")
        script = diff_tokens(wrong_ast, gold_ast)
    elif query_rep == "sql":
        script = diff_clauses_sql(wrong_ast, gold_ast)
    else:
        script = diff_clauses_pydict(decompose(wrong_ast), decompose(gold_ast))
    return render_edits(script), len(script)


def serialize_example(question: str, schema_serial: str, wrong_ast, gold_ast,
                      query_rep: str, edit_rep: str, program_only: bool = False,
                      edits_text: Optional[str] = None) -> tuple[str, str]:
    """Build the (x, y) pair: x = utterance | schema | wrong query, and
    y = edits <sep> gold query (or the edits alone in program-only mode)."""
    if edits_text is None:
        edits_text, n_edits = render_edit_target(wrong_ast, gold_ast, query_rep, edit_rep)
        if n_edits == 0:
            raise DatasetError("refusing to serialize a pair with no edits")
    if query_rep == "sql":
        wrong_repr = render(wrong_ast)
        gold_repr = render(gold_ast)
    else:
        wrong_repr = render_pydict(decompose(wrong_ast))
        gold_repr = render_pydict(decompose(gold_ast))
    x = X_SEPARATOR.join([question, schema_serial, wrong_repr])
    if program_only:
        if edit_rep != "program":
            raise DatasetError("program-only serialization requires program edits")
        return x, edits_text
    return x, edits_text + Y_SEPARATOR + gold_repr


# ---------------------------------------------------------------------------
# Dev-set extraction and statistics


@dataclass(frozen=True)
class DatasetSplit:
    train: list[ExampleRecord]
    dev: list[ExampleRecord]


def build_dev_set(records: list[ExampleRecord], n_dbs: int = 8,
                  seed: int = 0) -> DatasetSplit:
    """Sample n_dbs databases for the dev set; within each question keep only
    the highest-confidence wrong parse. Every record of a dev database
    leaves the train set, so no (db_id, question) pair leaks."""
    db_ids = sorted({r.db_id for r in records})
    if n_dbs > len(db_ids):
        raise DatasetError(f"cannot sample {n_dbs} databases from {len(db_ids)}")
    rng = random.Random(seed)
    dev_dbs = set(rng.sample(db_ids, n_dbs))
    train = [r for r in records if r.db_id not in dev_dbs]
    best: dict[tuple, ExampleRecord] = {}
    order: list[tuple] = []
    for record in records:
        if record.db_id not in dev_dbs:
            continue
        key = (record.db_id, record.question, record.query_rep, record.edit_rep)
        if key not in best:
            best[key] = record
            order.append(key)
        elif (record.beam_score, -record.beam_rank) > (best[key].beam_score, -best[key].beam_rank):
            best[key] = record
    return DatasetSplit(train=train, dev=[best[key] for key in order])


@dataclass(frozen=True)
class DatasetStats:
    count: int
    avg_edits: Optional[float]  # None when there are no records


def dataset_stats(records: list[ExampleRecord]) -> DatasetStats:
    if not records:
        return DatasetStats(0, None)
    return DatasetStats(len(records), sum(r.n_edits for r in records) / len(records))
