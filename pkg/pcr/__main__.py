import sys

from pcr.cli import main

sys.exit(main())
