import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE: dict[int, tuple[bool, str]] = {}
ACCEPTANCE_NAMES = {
    1: "zero at init",
    2: "gradient correctness",
    3: "NTK Monte-Carlo oracle and anchors",
    4: "elliptical potential inequality",
    5: "Gram convergence trend",
    6: "sublinear regret",
    7: "nonlinearity gap vs linear baselines",
    8: "parity with full-covariance NeuralUCB",
    9: "selection-time advantage",
    10: "classification bandit sanity",
    11: "determinism",
}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, name in ACCEPTANCE_NAMES.items():
        if n in ACCEPTANCE:
            ok, detail = ACCEPTANCE[n]
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d} ({name}): {detail}")
        else:
            terminalreporter.write_line(f"FAIL criterion {n:2d} ({name}): not evaluated")
