"""Date handling shared by the rule engine, the registry service, and the
feature pipeline.

Two distinct notions are kept deliberately separate:

* *format validity* -- the string looks like an ISO date (``YYYY-MM-DD``).
  This is the only check the feature pipeline ever performs.
* *calendar validity* -- the date actually exists (no month 13, no Feb 30).
  Only the registry service cares; a format-valid but calendar-invalid
  date is indistinguishable from a good one at the feature level.
"""

from __future__ import annotations

import re
from datetime import date

DATE_FORMAT_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def is_format_valid(value) -> bool:
    """True iff *value* is a string matching ``YYYY-MM-DD``."""
    return isinstance(value, str) and DATE_FORMAT_RE.match(value) is not None


def is_calendar_valid(value) -> bool:
    """True iff *value* is format-valid and names a real calendar day."""
    if not is_format_valid(value):
        return False
    y, m, d = (int(part) for part in value.split("-"))
    try:
        date(y, m, d)
    except ValueError:
        return False
    return True
