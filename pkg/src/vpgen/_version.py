# Do not edit this file manually, Github actions will modify it.
__version__ = "1.0.0"
