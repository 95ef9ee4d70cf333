"""Line-oriented run reports.

The text form is ``key=value`` lines in a fixed order.  Wall-clock timings
change from run to run, so they are written only when asked for; everything
else is a function of the inputs and seeds.
"""

import json
from dataclasses import dataclass, field

import numpy as np


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (list, tuple, np.ndarray)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def format_profile(profile):
    """Rows separated by ``;``, entries by ``,``."""
    return ";".join(",".join(repr(float(p)) for p in row) for row in np.asarray(profile))


@dataclass
class RunReport:
    algorithm: str
    parameters: dict
    regret: float
    verdicts: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(self.verdicts.values())

    def lines(self, timings=False):
        out = [f"algorithm={self.algorithm}"]
        out += [f"{k}={_fmt(v)}" for k, v in self.parameters.items()]
        out.append(f"regret={_fmt(float(self.regret))}")
        out += [f"{k}={_fmt(v)}" for k, v in self.metrics.items()]
        out += [f"verified_{k}={_fmt(v)}" for k, v in self.verdicts.items()]
        if timings:
            out += [f"time_{k}={v:.3f}" for k, v in self.timings.items()]
        out.append(f"status={'ok' if self.ok else 'failed'}")
        return out

    def to_text(self, timings=False):
        return "\n".join(self.lines(timings)) + "\n"

    def to_dict(self):
        def plain(v):
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, (np.floating, np.integer, np.bool_)):
                return v.item()
            if isinstance(v, (list, tuple)):
                return [plain(x) for x in v]
            if isinstance(v, dict):
                return {k: plain(x) for k, x in v.items()}
            return v

        return {
            "algorithm": self.algorithm,
            "parameters": plain(self.parameters),
            "regret": float(self.regret),
            "metrics": plain(self.metrics),
            "verdicts": plain(self.verdicts),
            "timings": plain(self.timings),
            "status": "ok" if self.ok else "failed",
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
