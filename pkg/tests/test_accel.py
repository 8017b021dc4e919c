import os
import runpy
import subprocess
import sys
from pathlib import Path

from kerrqed import _accel

ROOT = Path(__file__).resolve().parents[1]


def test_env_flag_disables_numba():
    env = dict(os.environ, **{_accel.ENV_FLAG: "1"})
    code = "from kerrqed import _accel; print(_accel.USE_NUMBA)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "False"


def test_benchmark_script_runs(capsys):
    mod = runpy.run_path(str(ROOT / "benchmarks" / "bench_kernels.py"))
    mod["main"](["--dim", "6", "--points", "11", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "numpy" in out and "numba" in out
