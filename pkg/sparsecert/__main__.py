import sys

from sparsecert.cli import main

sys.exit(main())
