import sys

from qamp.cli import main

sys.exit(main())
