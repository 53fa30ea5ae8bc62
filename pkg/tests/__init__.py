"""Test suite for cohort ingestion, features, fairness, network and experiments"""
