import sys

from martylab.cli import main

sys.exit(main())
