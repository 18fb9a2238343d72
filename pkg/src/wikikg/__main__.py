import sys

from wikikg.cli import main

sys.exit(main())
