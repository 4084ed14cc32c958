"""Runtime switches.

``MROOT_CHECKS=1`` turns on the expensive self-checks (exact division
re-multiplication, numeric confirmation of zero-test verdicts).  The test
suite enables them in ``conftest.py``.
"""
import os

_checks = os.environ.get("MROOT_CHECKS", "0") not in ("", "0", "false", "no")


def checks_enabled() -> bool:
    return _checks


def set_checks(flag: bool) -> bool:
    """Set the self-check flag, returning the previous value."""
    global _checks
    old, _checks = _checks, bool(flag)
    return old
