"""Minimal external-model server: the whole wire protocol in one page.

The core launches this script as a child process and speaks
newline-delimited JSON over stdin/stdout:

    -> {"type": "hello", "protocol": 1, "input_length": 168}
    <- {"type": "ready"}
    -> {"type": "predict", "id": 1, "windows": [[...], ...]}
    <- {"type": "prediction", "id": 1, "predictions": [...]}
    -> {"type": "bye"}          (child exits 0)

Replace `forecast` with any model; everything else is plumbing.  Errors go
to stderr and exit nonzero so the parent can surface them.
"""

import json
import sys


def forecast(windows):
    # Persistence: tomorrow looks like the last observed hour.
    return [w[-1] for w in windows]


def main():
    hello = json.loads(sys.stdin.readline())
    if hello.get("type") != "hello" or hello.get("protocol") != 1:
        print(f"unsupported handshake: {hello}", file=sys.stderr)
        sys.exit(1)
    print(json.dumps({"type": "ready"}), flush=True)

    for line in sys.stdin:
        request = json.loads(line)
        kind = request.get("type")
        if kind == "bye":
            sys.exit(0)
        if kind != "predict":
            print(f"unknown request type: {kind}", file=sys.stderr)
            sys.exit(1)
        reply = {
            "type": "prediction",
            "id": request["id"],
            "predictions": forecast(request["windows"]),
        }
        print(json.dumps(reply), flush=True)


if __name__ == "__main__":
    main()
