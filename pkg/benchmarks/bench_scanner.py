"""Compare the pure-Python scanner against the compiled extension.

Runs both backends over the bundled gold SQL corpus, checks they emit
identical tokens, and reports throughput.  Invoke from the repo root:

    python3 benchmarks/bench_scanner.py [--repeat N]
"""

import argparse
import statistics
import time
from pathlib import Path

from convsql.lexer import SCANNER_BACKEND, _scan_py

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def load_corpus() -> list[str]:
    out = []
    for line in (FIXTURES / "gold_sqls.txt").read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line.split("\t", 1)[1])
    return out


def bench(fn, corpus: list[str], repeat: int) -> list[float]:
    times = []
    for _ in range(repeat):
        started = time.perf_counter()
        for sql in corpus:
            fn(sql)
        times.append(time.perf_counter() - started)
    return times


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()

    corpus = load_corpus()
    total_chars = sum(len(s) for s in corpus)
    backends = [("pure", _scan_py)]
    try:
        from convsql._scanner import scan_tokens
    except ImportError:
        scan_tokens = None
        print("compiled scanner not built; benchmarking pure backend only")
    else:
        backends.append(("compiled", scan_tokens))
        for sql in corpus:
            if scan_tokens(sql) != _scan_py(sql):
                raise SystemExit(f"backend outputs differ on: {sql}")

    print(f"corpus: {len(corpus)} queries, {total_chars} chars")
    print(f"active backend at import: {SCANNER_BACKEND}")
    results = {}
    for name, fn in backends:
        bench(fn, corpus, repeat=5)  # warm up
        times = bench(fn, corpus, args.repeat)
        best = min(times)
        results[name] = best
        print(
            f"{name:>9}: best {best * 1e3:8.3f} ms/pass"
            f"  median {statistics.median(times) * 1e3:8.3f} ms"
            f"  ({total_chars / best / 1e6:6.1f} MB/s)"
        )
    if scan_tokens is not None:
        print(f"  speedup: {results['pure'] / results['compiled']:.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
