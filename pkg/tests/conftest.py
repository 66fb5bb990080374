import os
import sys

# tests import shared helpers/oracles as plain modules
sys.path.insert(0, os.path.dirname(__file__))
