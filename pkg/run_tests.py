"""
Test runner script for the PCR test suite.
Run ``python run_tests.py [all|unit|integration|statistical|quick|coverage]``.
"""
import subprocess
import sys
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

SELECTIONS = {
    "all": [],
    "unit": ["-m", "unit"],
    "integration": ["-m", "integration"],
    "statistical": ["-m", "statistical and not slow"],
    "quick": ["-m", "not slow"],
    "coverage": ["-m", "not slow", "--cov=pcr", "--cov-report=term-missing"],
}


def run_tests(test_type="all"):
    """Run pytest tests based on type."""
    if test_type not in SELECTIONS:
        print(f"Unknown test type: {test_type}")
        print(f"   Valid types: {', '.join(SELECTIONS)}")
        sys.exit(1)

    print(f"\nRunning {test_type.upper()} tests...\n")
    cmd = ["pytest", "-v", "--tb=short"] + SELECTIONS[test_type]
    result = subprocess.run(cmd, cwd=Path(__file__).parent)
    return result.returncode


def main():
    """Main test runner."""
    print("=" * 60)
    print("  PCR Test Suite")
    print("=" * 60)

    test_type = sys.argv[1] if len(sys.argv) > 1 else "all"
    exit_code = run_tests(test_type)

    print("\n" + "=" * 60)
    print("  ALL TESTS PASSED!" if exit_code == 0 else "  SOME TESTS FAILED")
    print("=" * 60)

    sys.exit(exit_code)


if __name__ == "__main__":
    main()
