import json

from bellcheck.config.settings import REPO_ROOT, Settings, settings
from bellcheck.errors import MarginalFeasibilityError, NonCommutingError
from bellcheck.logging.audit import Auditor
from bellcheck.logging.events import fmt_check, fmt_error, fmt_status


def test_defaults():
    s = Settings()
    assert s.seed == 42
    assert s.lp_tol == 1e-9
    assert s.grid_steps == 24 and s.refine_iters == 60
    assert settings.data_dir.startswith(str(REPO_ROOT))


def test_auditor_writes_jsonl(tmp_path):
    path = tmp_path / "audit.log"
    auditor = Auditor(str(path))
    auditor.log("run", {"command": "chsh", "exit_code": 0})
    auditor.log("run", {"command": "simulate", "exit_code": 1})
    lines = path.read_text(encoding="utf-8").splitlines()
    assert [json.loads(x)["payload"]["command"] for x in lines] == ["chsh", "simulate"]
    assert json.loads(lines[0])["ts"].endswith("Z")


def test_auditor_disabled_without_path(tmp_path):
    auditor = Auditor("")
    assert not auditor.enabled
    auditor.log("run", {"command": "chsh"})


def test_event_formatters():
    assert fmt_check("chsh", "bound", False, 3.0, 2.0, 1e-12) == "chsh: check bound FAILED: actual=3.0, expected=2.0, tol=1.0e-12"
    assert fmt_status("moment-check", "PASS") == "moment-check: PASS"
    assert fmt_status("simulate", "done", {"n": 10, "z": 0.5}) == "simulate: done (n=10, z=0.5)"
    assert fmt_error("spectral-demo", NonCommutingError((0, 1), 2.0)).startswith("spectral-demo: error NonCommutingError")
    assert "1.000e-09" in str(MarginalFeasibilityError(2e-9, 1e-9, 1e-9))
