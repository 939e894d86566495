import pytest

from coopeq import ValidationError
from coopeq.repro import CASES, run_repro_suite, select_cases, thread_count


def test_every_case_matches():
    results = run_repro_suite(threads=4)
    failed = [r.to_json() for r in results if not r.ok]
    assert not failed
    assert [r.case.id for r in results] == [c.id for c in CASES]


def test_ids_are_unique():
    assert len({c.id for c in CASES}) == len(CASES)


def test_prefix_selection():
    assert {c.id for c in select_cases("traveler-b5")} >= {"traveler-b5-value"}
    assert select_cases("prisoner*") == [c for c in CASES if c.id.startswith("prisoner")]
    with pytest.raises(ValidationError, match="unknown repro case"):
        select_cases("nothing-here")


def test_thread_count_from_environment(monkeypatch):
    monkeypatch.setenv("COOPEQ_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("COOPEQ_THREADS", "0")
    with pytest.raises(ValidationError):
        thread_count()
    monkeypatch.setenv("COOPEQ_THREADS", "many")
    with pytest.raises(ValidationError):
        thread_count()


def test_serial_and_parallel_agree():
    serial = run_repro_suite("prisoner*", threads=1)
    parallel = run_repro_suite("prisoner*", threads=3)
    assert [r.to_json()["actual"] for r in serial] == [r.to_json()["actual"] for r in parallel]
