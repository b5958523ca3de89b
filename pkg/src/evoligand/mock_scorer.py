"""Mock external scorer speaking the gateway wire protocol.

Reads {"id": n, "smiles": s} JSON lines from stdin and answers with
{"id": n, "score": x}, where the score is a deterministic function of the
SMILES bytes: -(sum(bytes) mod 1300)/100 - 1.0, i.e. always in [-14, -1].

Flags make it misbehave on purpose for robustness tests:
  --exit-after N   terminate abruptly after answering N requests
  --fail-id K      answer id K with an error response
  --garbage-id K   answer id K with an unparseable line
  --sleep S        sleep S seconds before every response

Run as: python -m evoligand.mock_scorer [flags]
"""

from __future__ import annotations

import argparse
import json
import sys
import time


def mock_energy(smiles: str) -> float:
    return -(sum(smiles.encode()) % 1300) / 100.0 - 1.0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--exit-after", type=int, default=None)
    parser.add_argument("--fail-id", type=int, default=None)
    parser.add_argument("--garbage-id", type=int, default=None)
    parser.add_argument("--sleep", type=float, default=0.0)
    args = parser.parse_args(argv)

    answered = 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            rid = int(req["id"])
            smiles = str(req.get("smiles", ""))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            continue
        if args.sleep:
            time.sleep(args.sleep)
        if args.garbage_id is not None and rid == args.garbage_id:
            sys.stdout.write("not json at all\n")
        elif args.fail_id is not None and rid == args.fail_id:
            sys.stdout.write(json.dumps({"id": rid, "error": "rejected"}) + "\n")
        else:
            sys.stdout.write(json.dumps({"id": rid, "score": mock_energy(smiles)}) + "\n")
        sys.stdout.flush()
        answered += 1
        if args.exit_after is not None and answered >= args.exit_after:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
