import sys

from gsbm_lab.cli.handler import main

sys.exit(main())
