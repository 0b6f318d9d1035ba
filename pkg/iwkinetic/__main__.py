import sys

from iwkinetic.app import main

sys.exit(main())
