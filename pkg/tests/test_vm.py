import pytest

from paperdata import CASE_CARS, CASE_HR, CASE_TWEETS, CASES

from sqlpatch.clausemap import decompose, to_sql
from sqlpatch.diffs import diff_clauses_pydict, diff_clauses_sql, diff_program, diff_tokens
from sqlpatch.editscript import EditAction, EditScript
from sqlpatch.errors import ApplyError, ExecError
from sqlpatch.parse import parse_sql
from sqlpatch.program import EditProgram, parse_program
from sqlpatch.vm import apply_clause_edits, apply_token_edits, exec_program


def maps(case, schemas):
    schema = schemas[case.db_id]
    return (decompose(parse_sql(case.wrong, schema)),
            decompose(parse_sql(case.gold, schema)))


# ---------------------------------------------------------------------------
# exec_program


def test_exec_fixture_programs(schemas):
    for case in CASES:
        wrong_map, gold_map = maps(case, schemas)
        program = parse_program(case.program)
        result = exec_program(wrong_map, program)
        assert result == gold_map
        assert to_sql(result) == case.gold


def test_exec_empty_program_is_identity(schemas):
    wrong_map, _ = maps(CASE_TWEETS, schemas)
    assert exec_program(wrong_map, EditProgram()) == wrong_map


def test_exec_does_not_mutate_input(schemas):
    wrong_map, _ = maps(CASE_HR, schemas)
    before = wrong_map.copy()
    exec_program(wrong_map, parse_program(CASE_HR.program))
    assert wrong_map == before


def test_exec_missing_intermediate(schemas):
    wrong_map, _ = maps(CASE_TWEETS, schemas)  # no where clause at all
    program = parse_program('sql["where"]["subquery0"]["select"] = "select tweets.id"')
    with pytest.raises(ExecError, match="missing"):
        exec_program(wrong_map, program)


def test_exec_pop_absent_key(schemas):
    wrong_map, _ = maps(CASE_TWEETS, schemas)
    with pytest.raises(ExecError, match="absent"):
        exec_program(wrong_map, parse_program('sql.pop("groupBy")'))


def test_exec_pop_subquery_orphans(schemas):
    wrong_map, _ = maps(CASE_CARS, schemas)
    with pytest.raises(ExecError, match="placeholder"):
        exec_program(wrong_map, parse_program('sql["where"].pop("subquery0")'))


def test_exec_assign_unreferenced_placeholder(schemas):
    wrong_map, _ = maps(CASE_CARS, schemas)
    program = parse_program(
        'sql["where"]["subquery1"] = "select cars_data.id from cars_data"')
    with pytest.raises(ExecError, match="not referenced"):
        exec_program(wrong_map, program)


def test_exec_assign_value_with_subquery_recomposes(schemas):
    schema = schemas["cars"]
    wrong_map = decompose(parse_sql(
        "select count(*) from cars_data where cars_data.accelerate > 20", schema))
    gold = parse_sql("select count(*) from cars_data where cars_data.accelerate > "
                     "(select avg(cars_data.accelerate) from cars_data)", schema)
    program = diff_program(wrong_map, decompose(gold))
    result = exec_program(wrong_map, program)
    assert result == decompose(gold)


def test_exec_assign_wrong_keyword_rejected(schemas):
    wrong_map, _ = maps(CASE_TWEETS, schemas)
    with pytest.raises(ExecError):
        exec_program(wrong_map, parse_program('sql["orderBy"] = "limit 3"'))


def test_exec_statement_order_does_not_leak(schemas):
    """Keys end up canonical regardless of assignment order."""
    wrong_map, _ = maps(CASE_TWEETS, schemas)
    program = parse_program('sql["limit"] = "limit 5"\nsql["where"] = "where tweets.uid = 3"')
    result = exec_program(wrong_map, program)
    assert result.keys() == ["select", "from", "where", "orderBy", "limit"]


# ---------------------------------------------------------------------------
# apply_clause_edits


def test_apply_fixture_clause_scripts(schemas):
    for case in CASES:
        schema = schemas[case.db_id]
        wrong = parse_sql(case.wrong, schema)
        gold = parse_sql(case.gold, schema)
        wrong_map, gold_map = decompose(wrong), decompose(gold)
        assert apply_clause_edits(wrong_map, diff_clauses_sql(wrong, gold)) == gold_map
        assert apply_clause_edits(wrong_map,
                                  diff_clauses_pydict(wrong_map, gold_map)) == gold_map


def test_apply_agrees_with_exec(schemas):
    for case in CASES:
        wrong_map, gold_map = maps(case, schemas)
        via_script = apply_clause_edits(wrong_map,
                                        diff_clauses_pydict(wrong_map, gold_map))
        via_program = exec_program(wrong_map, diff_program(wrong_map, gold_map))
        assert to_sql(via_script) == to_sql(via_program)


def test_apply_delete_absent_anchor(schemas):
    wrong_map, _ = maps(CASE_TWEETS, schemas)
    script = EditScript("clause-sql", (EditAction("delete", old="group by tweets.uid"),))
    with pytest.raises(ApplyError, match="anchor"):
        apply_clause_edits(wrong_map, script)


def test_apply_replace_stale_content(schemas):
    wrong_map, _ = maps(CASE_TWEETS, schemas)
    script = EditScript("clause-sql", (
        EditAction("replace", old="order by tweets.uid", new="order by tweets.id"),))
    with pytest.raises(ApplyError, match="anchor"):
        apply_clause_edits(wrong_map, script)


def test_apply_insert_existing_key(schemas):
    wrong_map, _ = maps(CASE_TWEETS, schemas)
    script = EditScript("clause-sql", (EditAction("insert", new="select tweets.id"),))
    with pytest.raises(ApplyError, match="already-present"):
        apply_clause_edits(wrong_map, script)


def test_apply_empty_script_is_identity(schemas):
    wrong_map, _ = maps(CASE_HR, schemas)
    assert apply_clause_edits(wrong_map, EditScript("clause-sql")) == wrong_map


def test_apply_merged_insert_lands_in_subquery(schemas):
    """A grouped insert following a subquery-internal replace stays in the
    same subquery."""
    wrong_map, gold_map = maps(CASE_CARS, schemas)
    script = diff_clauses_sql(parse_sql(CASE_CARS.wrong, schemas["cars"]),
                              parse_sql(CASE_CARS.gold, schemas["cars"]))
    result = apply_clause_edits(wrong_map, script)
    assert result == gold_map
    assert "limit" not in result  # the limit belongs to the subquery


def test_apply_inside_set_op_right_query(schemas):
    schema = schemas["hr"]
    wrong = parse_sql("select employee.name from employee union "
                      "select employee.name from employee where employee.age > 40",
                      schema)
    gold = parse_sql("select employee.name from employee union "
                     "select employee.name from employee where employee.age > 50",
                     schema)
    wrong_map, gold_map = decompose(wrong), decompose(gold)
    assert apply_clause_edits(wrong_map, diff_clauses_sql(wrong, gold)) == gold_map
    assert apply_clause_edits(wrong_map,
                              diff_clauses_pydict(wrong_map, gold_map)) == gold_map
    assert exec_program(wrong_map, diff_program(wrong_map, gold_map)) == gold_map


def test_apply_whole_composite_replace(schemas):
    """When the composite clause text itself changes, the whole entry is
    replaced, subqueries included, at both clause granularities."""
    schema = schemas["cars"]
    wrong = parse_sql("select count(*) from cars_data where cars_data.accelerate > "
                      "(select max(cars_data.horsepower) from cars_data) and "
                      "cars_data.year = 1970", schema)
    gold = parse_sql("select count(*) from cars_data where cars_data.mpg > "
                     "(select max(cars_data.horsepower) from cars_data) and "
                     "cars_data.year = 1970", schema)
    wrong_map, gold_map = decompose(wrong), decompose(gold)
    script = diff_clauses_sql(wrong, gold)
    assert len(script.actions) == 1 and script.actions[0].kind == "replace"
    assert "(select" in script.actions[0].new  # subquery inlined in the payload
    assert apply_clause_edits(wrong_map, script) == gold_map
    assert apply_clause_edits(wrong_map,
                              diff_clauses_pydict(wrong_map, gold_map)) == gold_map
    assert exec_program(wrong_map, diff_program(wrong_map, gold_map)) == gold_map


def test_exec_replace_whole_subquery(schemas):
    wrong_map, _ = maps(CASE_CARS, schemas)
    program = parse_program(
        'sql["where"]["subquery0"] = "select cars_data.id from cars_data limit 3"')
    result = exec_program(wrong_map, program)
    sub = result.get("where").subqueries["subquery0"]
    assert sub.get("select") == "select cars_data.id"
    assert sub.get("limit") == "limit 3"


# ---------------------------------------------------------------------------
# apply_token_edits


def test_token_ambiguity_witness(schemas):
    schema = schemas["social"]
    wrong = parse_sql(CASE_TWEETS.wrong, schema)
    gold = parse_sql(CASE_TWEETS.gold, schema)
    report = apply_token_edits(CASE_TWEETS.wrong, diff_tokens(wrong, gold))
    # leftmost match rewrites the select column, not the order-by column
    assert report.result == \
        "select tweets.createdate from tweets order by tweets.text"
    assert report.ambiguous_spans == 1
    assert report.result != CASE_TWEETS.gold


def test_token_unambiguous_replace(schemas):
    schema = schemas["hr"]
    wrong = parse_sql("select employee.name from employee where employee.age > 30",
                      schema)
    gold = parse_sql("select employee.name from employee where employee.age > 40",
                     schema)
    report = apply_token_edits("select employee.name from employee where "
                               "employee.age > 30", diff_tokens(wrong, gold))
    assert report.result == ("select employee.name from employee where "
                             "employee.age > 40")
    assert report.ambiguous_spans == 0
    assert report.skipped == 0


def test_token_empty_script_echoes(schemas):
    report = apply_token_edits(CASE_TWEETS.wrong, EditScript("token"))
    assert report.result == CASE_TWEETS.wrong


def test_token_absent_span_skipped(schemas):
    script = EditScript("token", (EditAction("delete", old="group by tweets.uid"),))
    report = apply_token_edits(CASE_TWEETS.wrong, script)
    assert report.skipped == 1
    assert report.result == CASE_TWEETS.wrong
