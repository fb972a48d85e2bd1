import sys

from diabatic.cli import main

sys.exit(main())
