import sys

from quasieinstein.cli import main

sys.exit(main())
