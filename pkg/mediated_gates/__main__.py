import sys

from mediated_gates.main import main

sys.exit(main())
