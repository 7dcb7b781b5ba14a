"""
Unmonitored Customer Estimation - Main Application

This is the entry point for the customer estimation command line.
"""
import sys

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from .pipeline.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
