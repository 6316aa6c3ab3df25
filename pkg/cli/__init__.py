"""Command-line interface for the era splitting GBDT toolkit"""
