"""Artifact writers for exact tables, replica batches and reports"""
