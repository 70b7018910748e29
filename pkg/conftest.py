# Repository root on sys.path for the test suite.
