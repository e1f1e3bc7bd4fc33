# Tests for modules/, models/ and the command line; shared fixtures live in conftest.py
