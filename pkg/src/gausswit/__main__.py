import sys

from gausswit.cli import main

sys.exit(main())
