"""Configuration management: paths, thresholds and training defaults"""
