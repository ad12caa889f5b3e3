"""Golden input bundle for the figure tests.

The bundle is produced by invoking the primary toolkit's CLI as a
subprocess — the only interface this package is allowed to consume.
"""

import json
import subprocess
import sys

import pytest


def run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "fastslow.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, f"fastslow {' '.join(args)} failed:\n{proc.stderr}"
    return proc


@pytest.fixture(scope="session")
def bundle(tmp_path_factory):
    root = tmp_path_factory.mktemp("bundle")
    cfg = root / "config.json"
    cfg.write_text(json.dumps({
        "model": "chialvo",
        "params": {"a": 1.0, "b": 5.0, "c": 3.5, "k": 0.035},
        "eps": 1e-3,
        "grid": {"x_index": 1, "lo": 1.1, "hi": 2.9, "num": 200},
        "singularities": {"lo": 0.04, "hi": 5.0, "num": 1500},
    }))
    run_cli("analyze", "--config", str(cfg), "--out", str(root / "analyze"))
    run_cli("simulate", "--config", str(cfg), "--out", str(root / "sim"),
            "--steps", "20000")
    run_cli("regimes", "--case", "all", "--eps", "1e-3", "--steps", "30000",
            "--out", str(root / "regimes"))
    run_cli("euler-study", "--eps-list", "1e-2,5e-3,2.5e-3", "--h-list", "0.4,0.2,0.1",
            "--out", str(root / "euler"))
    return root
