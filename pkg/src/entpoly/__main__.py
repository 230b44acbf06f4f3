import sys

from entpoly.cli import main

sys.exit(main())
