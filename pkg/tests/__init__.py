"""Tests for the Krita Generative AI plugin."""
