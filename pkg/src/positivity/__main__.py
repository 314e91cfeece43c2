import sys

from positivity.cli import main

sys.exit(main())
