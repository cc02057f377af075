import logging
from pathlib import Path
import shutil

import nox  # noqa


pkg_name = "selfnormlab"

PYTHONS = ["3.8", "3.9", "3.10", "3.11"]
COVERAGE_PYTHON = "3.11"

# set the default activated sessions, minimal for CI
nox.options.sessions = ["tests", "flake8"]
nox.options.reuse_existing_virtualenvs = True  # this can be done using -r

nox_logger = logging.getLogger("nox")


class Folders:
    root = Path(__file__).parent
    ci_tools = root / "ci_tools"
    site = root / "site"
    reports_root = root / "docs" / "reports"
    test_reports = reports_root / "junit"
    test_xml = test_reports / "junit.xml"
    test_html = test_reports / "report.html"
    coverage_reports = reports_root / "coverage"
    coverage_xml = coverage_reports / "coverage.xml"
    coverage_intermediate_file = root / ".coverage"
    flake8_reports = reports_root / "flake8"
    flake8_intermediate_file = root / "flake8stats.txt"


def rm_folder(folder: Path):
    if folder.exists():
        shutil.rmtree(str(folder))


def rm_file(file: Path):
    if file.exists():
        file.unlink()


@nox.session(python=PYTHONS)
def tests(session):
    """Run the test suite. On the coverage python version, also generate the junit and coverage reports."""

    coverage = session.python == COVERAGE_PYTHON

    # As soon as this runs, we delete the target site and coverage files to avoid reporting wrong coverage/etc.
    if coverage:
        rm_folder(Folders.site)
        rm_folder(Folders.reports_root)
        rm_file(Folders.coverage_intermediate_file)

    # install self with the test requirements so that it is recognized by pytest
    session.install("-e", ".[test]")

    # check that it can be imported even from a different folder
    session.run('python', '-c', 'import os; os.chdir(\'./docs/\'); import %s' % pkg_name)

    if not coverage:
        session.run("python", "-m", "pytest", "--cache-clear", "-v", "%s/" % pkg_name)
    else:
        session.install("coverage", "pytest-html", "genbadge[tests,coverage]")
        session.run("coverage", "run", "--source", pkg_name, "-m", "pytest", "--cache-clear",
                    "--junitxml=%s" % Folders.test_xml, "--html=%s" % Folders.test_html, "-v", "%s/" % pkg_name)
        session.run("coverage", "report")
        session.run("coverage", "xml", "-o", str(Folders.coverage_xml))
        session.run("coverage", "html", "-d", str(Folders.coverage_reports))
        # delete this intermediate file, it is not needed anymore
        rm_file(Folders.coverage_intermediate_file)

        nox_logger.info("Generating badges for tests and coverage")
        session.run("genbadge", "tests", "-i", str(Folders.test_xml), "-o",
                    str(Folders.test_reports / "junit-badge.svg"), "-t", "100")
        session.run("genbadge", "coverage", "-i", str(Folders.coverage_xml), "-o",
                    str(Folders.coverage_reports / "coverage-badge.svg"))


@nox.session(python=COVERAGE_PYTHON)
def flake8(session):
    """Launch flake8 qualimetry."""

    session.install("-r", str(Folders.ci_tools / "flake8-requirements.txt"))
    session.install("-e", ".")

    rm_folder(Folders.flake8_reports)
    Folders.flake8_reports.mkdir(parents=True, exist_ok=True)
    rm_file(Folders.flake8_intermediate_file)

    # Options are set in `setup.cfg` file
    session.run("flake8", pkg_name, "--exit-zero", "--format=html", "--htmldir", str(Folders.flake8_reports),
                "--statistics", "--tee", "--output-file", str(Folders.flake8_intermediate_file))
    session.run("genbadge", "flake8", "-i", str(Folders.flake8_intermediate_file), "-o",
                str(Folders.flake8_reports / "flake8-badge.svg"))
    rm_file(Folders.flake8_intermediate_file)


@nox.session(python=COVERAGE_PYTHON)
def docs(session):
    """Generates the doc and serves it on a local http server. Pass '-- build' to build statically instead."""

    session.install("mkdocs-material", "mkdocs", "pymdown-extensions", "pygments")

    if session.posargs:
        # use posargs instead of "serve"
        session.run("mkdocs", *session.posargs)
    else:
        session.run("mkdocs", "serve")
