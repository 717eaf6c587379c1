"""
Driving the experiments from the command line
=============================================

Every capability is also a ``specdisc`` subcommand writing a JSON report.
"""

import json
import tempfile
from pathlib import Path

from specdisc.cli import main

out = Path(tempfile.mkdtemp())
main(["conditions", "--which", "ex54", "--alpha", "1", "--n", "1..4", "--l", "3..4",
      "--out-dir", str(out), "--format", "csv"])
print((out / "conditions.csv").read_text())

main(["dense-verify", "--samples", "500", "--seed", "7", "--out-dir", str(out)])
print(json.loads((out / "dense-verify.json").read_text())["results"]["failed"], "failures")

main(["golden", "write", "--report", str(out / "dense-verify.json"), "--golden", str(out / "gold.json")])
code = main(["golden", "compare", "--report", str(out / "dense-verify.json"),
             "--golden", str(out / "gold.json"), "--out-dir", str(out)])
print("golden compare exit code", code)
