"""Test suite for the SBN estimation toolkit."""
