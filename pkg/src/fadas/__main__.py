import sys

from fadas.cli import main

sys.exit(main())
