"""Example external objective: a quadratic fit term plus a linear cost.

Speaks the evaluation line protocol: reads one JSON line {"x": [...]}
on stdin, writes one JSON line {"components": [fit, cost]} on stdout,
and exits 0. Component 0 is -sum((x_i - 0.3)^2), peaked at 0.3 in every
coordinate with no global monotone direction; component 1 is
-sum(0.1 * x_i), strictly decreasing in every coordinate. Works for any
input dimension. Malformed input exits nonzero with a message on stderr.
"""

import json
import sys


def components(x):
    fit = -sum((v - 0.3) ** 2 for v in x)
    cost = -sum(0.1 * v for v in x)
    return [fit, cost]


def main():
    try:
        payload = json.loads(sys.stdin.readline())
        values = [float(v) for v in payload["x"]]
    except (ValueError, TypeError, KeyError) as exc:
        print(f"quadratic_adapter: bad input: {exc!r}", file=sys.stderr)
        return 1
    if not values:
        print("quadratic_adapter: x is empty", file=sys.stderr)
        return 1
    print(json.dumps({"components": components(values)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
