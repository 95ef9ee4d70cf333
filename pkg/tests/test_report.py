import json

import numpy as np

from anongame.report import RunReport, format_profile


def test_text_layout():
    rep = RunReport("smooth", {"n": 3, "k": 2}, 0.125, {"bound": True}, {"lipschitz": np.float64(0.25), "pure": [0, 1]},
                    {"total_s": 1.5})
    assert rep.to_text() == "algorithm=smooth\nn=3\nk=2\nregret=0.125\nlipschitz=0.25\npure=0,1\nverified_bound=true\nstatus=ok\n"
    assert "time_total_s=1.500" in rep.to_text(timings=True)


def test_failed_verdict():
    rep = RunReport("verify", {}, 0.3, {"regret_le_eps": False})
    assert not rep.ok and rep.to_text().endswith("status=failed\n")


def test_json_round_trip():
    rep = RunReport("x", {"n": np.int64(2)}, np.float64(0.1), {"a": np.bool_(True)}, {"v": np.arange(3)})
    data = json.loads(rep.to_json())
    assert data == {"algorithm": "x", "parameters": {"n": 2}, "regret": 0.1, "metrics": {"v": [0, 1, 2]},
                    "verdicts": {"a": True}, "timings": {}, "status": "ok"}


def test_format_profile():
    assert format_profile([[0.5, 0.5], [1.0, 0.0]]) == "0.5,0.5;1.0,0.0"
