import json
import os
import sys
import time
from typing import Any, Dict


def _default(obj: Any) -> Any:
    # numpy scalars and complex values
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "item"):
        return obj.item()
    return str(obj)


def log_event(event: str, **fields: Any) -> None:
    """
    Emit one structured JSON line on stderr.

    Reason:
    - Result files own stdout and the output directory; diagnostics must not mix in.

    Benefit:
    - Events can be filtered by name. SOLITONLAB_QUIET=1 silences them.
    """
    if os.getenv("SOLITONLAB_QUIET", "0").strip() == "1":
        return
    payload: Dict[str, Any] = {
        "ts": time.time(),
        "event": event,
        **fields,
    }
    print(json.dumps(payload, ensure_ascii=False, default=_default), file=sys.stderr)
