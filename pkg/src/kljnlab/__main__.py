import sys

from kljnlab.cli import main

sys.exit(main())
