import sys

from kissmax.cli import main

sys.exit(main())
