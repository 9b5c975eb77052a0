"""Fixed-seed simulate -> estimate -> adjust -> evaluate run behind the golden files.

Run this file directly to regenerate the goldens next to it.
"""

import io
import pathlib
import sys

from priorshift.cli import main

GOLDEN_DIR = pathlib.Path(__file__).parent

OUTPUTS = [
    "posteriors.csv",
    "labels.txt",
    "train_prior.txt",
    "test_prior.txt",
    "estimate.txt",
    "trace.csv",
    "adjusted.csv",
    "report.csv",
    "stdout.txt",
]

SIMULATION = ["--classes", "5", "--symbols", "8", "--separability", "0.6",
              "--train-prior-family", "exp", "--test-prior-family", "linear",
              "--test-rate", "-0.8", "--n", "1000", "--seed", "7"]


def steps(d):
    d = pathlib.Path(d)
    return [
        ["simulate", *SIMULATION,
         "--out-posteriors", d / "posteriors.csv", "--out-labels", d / "labels.txt",
         "--out-train-prior", d / "train_prior.txt", "--out-test-prior", d / "test_prior.txt"],
        ["estimate", "--posteriors", d / "posteriors.csv", "--train-prior", d / "train_prior.txt",
         "--method", "em", "--trace", d / "trace.csv", "--out", d / "estimate.txt"],
        ["adjust", "--posteriors", d / "posteriors.csv", "--train-prior", d / "train_prior.txt",
         "--test-prior", d / "estimate.txt", "--out", d / "adjusted.csv"],
        ["evaluate", "--posteriors", d / "adjusted.csv", "--labels", d / "labels.txt",
         "--report", d / "report.csv"],
    ]


def run(d):
    """Run the pipeline into directory ``d``; stdout goes to ``d/stdout.txt``."""
    out = io.StringIO()
    for argv in steps(d):
        code = main([str(a) for a in argv], out=out)
        if code != 0:
            raise RuntimeError(f"step {argv[0]} exited with {code}")
    (pathlib.Path(d) / "stdout.txt").write_text(out.getvalue())


if __name__ == "__main__":
    run(pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else GOLDEN_DIR)
