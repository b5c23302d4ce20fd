"""Minimal wire-protocol server used by tests: persistence forecaster.

Reads newline-delimited JSON requests on stdin, answers on stdout, one reply
per request, flushing after each.  Exits 0 on "bye", nonzero on protocol
errors.
"""

import json
import sys


def main() -> int:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            print("malformed JSON request", file=sys.stderr)
            return 1
        kind = message.get("type")
        if kind == "hello":
            if message.get("protocol") != 1:
                sys.stdout.write(json.dumps({"type": "error", "message": "unsupported protocol"}) + "\n")
                sys.stdout.flush()
                return 1
            sys.stdout.write(json.dumps({"type": "ready"}) + "\n")
        elif kind == "predict":
            predictions = [window[-1] for window in message["windows"]]
            sys.stdout.write(json.dumps({"type": "prediction", "id": message["id"], "predictions": predictions}) + "\n")
        elif kind == "bye":
            return 0
        else:
            print(f"unknown message type {kind!r}", file=sys.stderr)
            return 1
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
