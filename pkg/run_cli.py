"""Run the pcr command line from a source checkout: ``python run_cli.py test --input data.csv``."""
import sys

from pcr.cli import main

if __name__ == "__main__":
    sys.exit(main())
