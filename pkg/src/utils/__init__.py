"""Shared helpers: logging, errors and seed derivation"""
