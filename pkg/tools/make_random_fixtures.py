"""One-off generator for the randomized fixture CSVs (seeded, committed as data)."""

import random
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "wikimeta" / "fixtures" / "data"
HEADER = "study,patients n,patients mean,patients sd,controls n,controls mean,controls sd"


def continuous(rng, k):
    lines = [HEADER]
    for i in range(k):
        n1, n2 = rng.randint(6, 60), rng.randint(6, 60)
        m2 = round(rng.uniform(2, 12), 2)
        m1 = round(m2 + rng.gauss(0.3, 1.0), 2)
        s1, s2 = round(rng.uniform(0.5, 3), 2), round(rng.uniform(0.5, 3), 2)
        lines.append(f"S{i + 1},{n1},{m1},{s1},{n2},{m2},{s2}")
    return "\n".join(lines) + "\n"


def binary(rng, k):
    lines = ["study,patients events,patients total,controls events,controls total"]
    for i in range(k):
        t1, t2 = rng.randint(8, 80), rng.randint(8, 80)
        lines.append(f"S{i + 1},{rng.randint(0, t1)},{t1},{rng.randint(0, t2)},{t2}")
    return "\n".join(lines) + "\n"


def main():
    rng = random.Random(20111)
    for i in range(1, 7):
        (DATA / f"random-{i}.csv").write_text(continuous(rng, rng.randint(2, 8)))
    (DATA / "random-binary-1.csv").write_text(binary(rng, 6))


if __name__ == "__main__":
    main()
