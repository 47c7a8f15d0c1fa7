# Entry point: python -m BeamPlan.main <command> ...
import sys

from BeamPlan.cli import main

if __name__ == '__main__':
    sys.exit(main())
