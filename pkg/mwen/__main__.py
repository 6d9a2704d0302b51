import sys

from mwen.cli import main

sys.exit(main())
