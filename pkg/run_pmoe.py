import sys

from app.controllers.cli_controller import cli_main

if __name__ == "__main__":
    sys.exit(cli_main())
