import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


@pytest.mark.parametrize("argv", [
    ["detection_rates.py", "--trials", "50", "--seed", "1"],
    ["survival_law.py", "--trials", "2000", "--controls", "6", "--seed", "2"],
    ["lambda_sweep.py", "--trials", "10", "--lambda-c", "0.2", "--messages", "5", "--seed", "3"],
])
def test_script_runs(argv, tmp_path):
    extra = ["--csv", str(tmp_path / "s.csv")] if argv[0] == "lambda_sweep.py" else []
    out = subprocess.run([sys.executable, str(SCRIPTS / argv[0]), *argv[1:], *extra],
                         capture_output=True, text=True, timeout=120)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip()
