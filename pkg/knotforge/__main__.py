import sys

from knotforge.cli import main

sys.exit(main())
