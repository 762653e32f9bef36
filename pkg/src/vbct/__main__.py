import sys

from vbct.harness.cli import main

sys.exit(main())
