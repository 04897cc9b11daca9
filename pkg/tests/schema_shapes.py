"""Structural fingerprints of emitted reports, pinned by files in tests/golden."""
import json
import os

from nilflow import cli

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

COMMANDS = {
    "growth": ["growth", "--alpha", "golden", "--N", "1024,4096,16384,65536,262144,1048576"],
    "cohomology": ["cohomology", "--alpha", "golden", "--roof", "trivial"],
    "ratner": ["ratner", "--alpha", "golden", "--delta", "1e-2", "--seed", "1"],
    "disjoint": ["disjoint", "--alpha", "golden", "--delta", "1e-2", "--seed", "1"],
    "moebius": ["moebius", "--alpha", "golden", "--N", "1000", "--triples", "1"],
    "flow": ["flow", "--alpha", "golden", "--t-max", "3"],
}

HEADERS = {"growth.csv": "N,value", "ratner_trace.csv": "n,a_n", "disjoint_trace.csv": "n,a_n",
           "flow.csv": "t,x,y,s,N"}


def shape(obj):
    """Keys of dicts (recursively) and the first element of lists; leaves collapse."""
    if isinstance(obj, dict):
        return {k: shape(v) for k, v in sorted(obj.items())}
    if isinstance(obj, list):
        return [shape(obj[0])] if obj else []
    return "leaf"


def emit(command, outdir):
    code = cli.main(COMMANDS[command] + ["--out", str(outdir)])
    assert code == 0
    with open(os.path.join(outdir, f"{command}.json"), encoding="utf-8") as fh:
        return json.load(fh)


if __name__ == "__main__":  # regenerate the golden files
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        for name in COMMANDS:
            rep = emit(name, tmp)
            with open(os.path.join(GOLDEN, f"{name}.json"), "w", encoding="utf-8") as fh:
                json.dump(shape(rep), fh, indent=1, sort_keys=True)
                fh.write("\n")
