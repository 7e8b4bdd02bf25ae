"""Random-input generator for the front-end fuzz check."""

import random

from conftest import SCENARIOS

VOCAB = [
    "scenario", "do", "serial", "parallel", "wait", "emit", "keep", "it", "in", "with", "import",
    "action", "actor", "struct", "inherits", "list", "of", "elapsed", "end", "fail", "robot", "x",
    ":", ",", ".", "(", ")", "[", "]", "==", "=", "'s'", '"t"', "1", "-3.0m", "0.5", "60s", "90deg",
    "\n", "\n    ", "\n        ", "    ", "\t", "#c\n", "\\", "'", "@", "\r\n", "\x00", "é",
]


def _seeds():
    return [p.read_text() for p in sorted(SCENARIOS.glob("*.osc"))]


def random_inputs(n: int, seed: int = 0):
    rng = random.Random(seed)
    corpus = _seeds()
    alphabet = [chr(c) for c in range(32, 127)] + ["\n", "\t", "\r", "\x7f", "ß", " "]
    for i in range(n):
        kind = i % 4
        if kind == 0:
            yield "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 80)))
        elif kind == 1:
            yield " ".join(rng.choice(VOCAB) for _ in range(rng.randint(0, 40)))
        elif kind == 2:
            text = list(rng.choice(corpus))
            for _ in range(rng.randint(1, 6)):
                pos = rng.randrange(len(text) + 1)
                op = rng.random()
                if op < 0.4 and text:
                    del text[min(pos, len(text) - 1)]
                elif op < 0.8:
                    text.insert(pos, rng.choice(VOCAB))
                else:
                    j = rng.randrange(len(text) + 1)
                    text[pos:pos] = text[j:j + rng.randint(1, 20)]
            yield "".join(text)
        else:
            yield bytes(rng.randrange(256) for _ in range(rng.randint(0, 60)))
