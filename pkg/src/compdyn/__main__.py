import sys

from compdyn.cli import main

sys.exit(main())
