"""Shared helpers: in-process CLI invocation and the fixture-config corpus."""

from pathlib import Path

import pytest

import holocomp.cli as cli

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "docs" / "fixtures"


def run_cli(args):
    """Invoke the CLI entry point in-process and return its exit code."""
    return cli.main([str(a) for a in args])


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def fixture_runs(tmp_path_factory):
    """Run every shipped example config twice, into separate directories.

    Heavy configs only execute here; CLI and determinism tests share the
    artifacts.  Maps command name -> dict with exit codes, report bytes,
    output dirs, and the config path.
    """
    runs = {}
    for cfg in sorted(FIXTURE_DIR.glob("*.json")):
        cmd = cfg.stem
        codes, blobs, outs = [], [], []
        for tag in ("first", "second"):
            out = tmp_path_factory.mktemp(f"{cmd}-{tag}")
            codes.append(run_cli([cmd, "--config", cfg, "--out", out]))
            blobs.append((out / "report.json").read_bytes())
            outs.append(out)
        runs[cmd] = {
            "codes": tuple(codes),
            "reports": tuple(blobs),
            "dirs": tuple(outs),
            "config": cfg,
        }
    return runs
