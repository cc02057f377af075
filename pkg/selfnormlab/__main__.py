# Authors: selfnormlab contributors
#
# License: 3-clause BSD
import sys

from selfnormlab.cli import main

sys.exit(main())
