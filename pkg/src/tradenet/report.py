"""Serializable result bundles and CSV helpers."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, np.generic):
        x = x.item()
    if hasattr(x, "to_dict"):
        return _plain(x.to_dict())
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


@dataclass
class AnalysisReport:
    """Named result sections plus free-text notes, JSON-serializable."""
    sections: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __getitem__(self, key):
        return self.sections[key]

    def __setitem__(self, key, value):
        self.sections[key] = value

    def __contains__(self, key):
        return key in self.sections

    def to_dict(self) -> dict:
        out = _plain(self.sections)
        out["notes"] = list(self.notes)
        return out

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow(["" if isinstance(v, float) and math.isnan(v) else v for v in row])
