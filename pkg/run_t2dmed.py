#!/usr/bin/env python3
"""
CLI runner script.
Run this from the project root directory.
"""
import os
import sys

# Add the project root to Python path
project_root = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, project_root)

from t2dmed.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
