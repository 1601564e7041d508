import sys

import szt.cli

if __name__ == '__main__':
    if szt.cli.run_cli():
        sys.exit(0)
    else:
        sys.exit(1)
