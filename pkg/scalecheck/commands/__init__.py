"""
Commands package.

One module per CLI subcommand.
"""
