import sys

from singlink.cli import main

sys.exit(main())
