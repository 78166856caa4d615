# src/nehari/__main__.py
import sys

from nehari.cli.main import main

sys.exit(main())
