import sys

from cvbell.cli import main

sys.exit(main())
