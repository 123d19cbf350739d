import json
import sqlite3
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from paperdata import TABLES_JSON  # noqa: E402

from sqlpatch.schema import schema_from_entry  # noqa: E402


@pytest.fixture(scope="session")
def schemas():
    return {entry["db_id"]: schema_from_entry(entry) for entry in TABLES_JSON}


@pytest.fixture(scope="session")
def tables_json_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("schemas") / "tables.json"
    path.write_text(json.dumps(TABLES_JSON), encoding="utf-8")
    return path


def _create(path, statements):
    conn = sqlite3.connect(path)
    with conn:
        for stmt in statements:
            conn.execute(stmt)
    conn.close()


@pytest.fixture(scope="session")
def db_dir(tmp_path_factory):
    """Tiny populated databases in the Spider directory layout."""
    root = tmp_path_factory.mktemp("database")

    social = root / "social"
    social.mkdir()
    _create(social / "social.sqlite", [
        "CREATE TABLE tweets (id INTEGER, uid INTEGER, text TEXT, createdate TEXT)",
        "INSERT INTO tweets VALUES (1, 10, 'hello', '2020-01-02')",
        "INSERT INTO tweets VALUES (2, 11, 'again', '2020-01-01')",
        "INSERT INTO tweets VALUES (3, 10, 'bye', '2020-01-03')",
    ])

    cars = root / "cars"
    cars.mkdir()
    _create(cars / "cars.sqlite", [
        "CREATE TABLE cars_data (id INTEGER, mpg REAL, horsepower INTEGER,"
        " accelerate REAL, year INTEGER)",
        "INSERT INTO cars_data VALUES (1, 18.0, 130, 12.0, 1970)",
        "INSERT INTO cars_data VALUES (2, 15.0, 165, 11.5, 1970)",
        "INSERT INTO cars_data VALUES (3, 36.0, 60, 19.4, 1980)",
        "INSERT INTO cars_data VALUES (4, 28.0, 90, 14.4, 1979)",
    ])

    hr = root / "hr"
    hr.mkdir()
    _create(hr / "hr.sqlite", [
        "CREATE TABLE employee (employee_id INTEGER, name TEXT, age INTEGER)",
        "CREATE TABLE evaluation (employee_id INTEGER, year_awarded INTEGER, bonus REAL)",
        "INSERT INTO employee VALUES (1, 'Ada', 40)",
        "INSERT INTO employee VALUES (2, 'Ben', 35)",
        "INSERT INTO employee VALUES (3, 'Cyd', 50)",
        "INSERT INTO evaluation VALUES (1, 2018, 500.0)",
        "INSERT INTO evaluation VALUES (2, 2019, 1200.0)",
        "INSERT INTO evaluation VALUES (1, 2019, 900.0)",
    ])

    shop = root / "shop"
    shop.mkdir()
    _create(shop / "shop.sqlite", [
        "CREATE TABLE products (product_id INTEGER, name TEXT, price REAL)",
        "CREATE TABLE orders (order_id INTEGER, product_id INTEGER, quantity INTEGER)",
        "INSERT INTO products VALUES (1, 'lamp', 20.0)",
        "INSERT INTO products VALUES (2, 'desk', 120.0)",
        "INSERT INTO orders VALUES (1, 1, 3)",
        "INSERT INTO orders VALUES (2, 2, 1)",
    ])

    school = root / "school"
    school.mkdir()
    _create(school / "school.sqlite", [
        "CREATE TABLE students (student_id INTEGER, name TEXT, gpa REAL)",
        "CREATE TABLE courses (course_id INTEGER, title TEXT, credits INTEGER)",
        "CREATE TABLE enrollment (student_id INTEGER, course_id INTEGER, grade TEXT)",
        "INSERT INTO students VALUES (1, 'Ada', 3.9)",
        "INSERT INTO students VALUES (2, 'Ben', 3.1)",
        "INSERT INTO courses VALUES (1, 'algebra', 4)",
        "INSERT INTO enrollment VALUES (1, 1, 'A')",
        "INSERT INTO enrollment VALUES (2, 1, 'B')",
    ])

    return root
