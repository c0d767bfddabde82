import json
import sys
from typing import Any


def emit(document: Any) -> None:
    """One JSON line on stdout; logs go to stderr"""
    sys.stdout.write(json.dumps(document, sort_keys=True) + "\n")
