from typing import Any, Optional

# --- Plain-English format helpers for the stderr log ---


def _kv(details: Optional[dict]) -> str:
    if not details:
        return ""
    kv = ", ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}" for k, v in details.items())
    return f" ({kv})"


def fmt_check(command: str, name: str, passed: bool, actual: Any, expected: Any, tolerance: Optional[float] = None) -> str:
    verdict = "ok" if passed else "FAILED"
    tol = f", tol={tolerance:.1e}" if tolerance is not None else ""
    return f"{command}: check {name} {verdict}: actual={actual}, expected={expected}{tol}"


def fmt_status(command: str, note: str, details: Optional[dict] = None) -> str:
    return f"{command}: {note}{_kv(details)}"


def fmt_error(command: str, error: BaseException) -> str:
    return f"{command}: error {type(error).__name__}: {error}"
