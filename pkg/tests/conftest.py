import pytest

from citemap.ingest import CitationRecord, Discipline

_acceptance: dict[str, str] = {}


def make_record(rid, publisher="A", citations=0, disciplines=(Discipline.SCI,),
                year=2008, has_isbn=True, has_issn=False, categories=None):
    discs = frozenset(disciplines)
    return CitationRecord(
        record_id=str(rid), publisher_raw=publisher, publisher=publisher, year=year,
        citations=citations,
        categories=tuple(categories) if categories is not None else tuple(d.value for d in discs),
        disciplines=discs, has_isbn=has_isbn, has_issn=has_issn)


@pytest.fixture
def record():
    return make_record


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid.split("::")[-1]] = "PASS" if report.passed else "FAIL"
    elif "test_acceptance.py" in report.nodeid and report.failed:
        _acceptance[report.nodeid.split("::")[-1]] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance.items():
        terminalreporter.write_line(f"{outcome}  {name}")
