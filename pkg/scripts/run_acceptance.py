"""Run the acceptance suite and print one PASS/FAIL line per criterion check."""
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"), "-q", "-s",
         "-p", "no:cacheprovider"],
        capture_output=True, text=True, cwd=ROOT,
    )
    lines = [ln for ln in proc.stdout.splitlines() if ln.startswith(("PASS ", "FAIL "))]
    # -s echoes each line once from the test and once from the summary hook
    seen = []
    for ln in lines:
        if ln not in seen:
            seen.append(ln)
    print("\n".join(seen))
    n_fail = sum(ln.startswith("FAIL") for ln in seen)
    print(f"\n{len(seen) - n_fail} passed, {n_fail} failed")
    return proc.returncode


if __name__ == "__main__":
    sys.exit(main())
