import subprocess
import sys
from pathlib import Path

import pytest

from helium import compile_source

DEMOS = Path(__file__).resolve().parent.parent / "demos"


@pytest.mark.parametrize("program", sorted((DEMOS / "programs").glob("*.he")), ids=lambda p: p.name)
def test_demo_programs_compile(program):
    result = compile_source(program.read_text(encoding="utf-8"))
    assert result.circuit is not None and result.warnings == []


@pytest.mark.parametrize("script, args", [
    ("tumor_recurrence.py", []),
    ("pre_reduction.py", ["--quick"]),
    ("rebalancing.py", []),
])
def test_demo_scripts_run(script, args):
    proc = subprocess.run([sys.executable, str(DEMOS / script), *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip()
