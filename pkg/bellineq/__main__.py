import sys

from bellineq.cli import main

sys.exit(main())
