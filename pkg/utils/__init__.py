"""Solver engine: graphs, pressure systems, amoeba iteration, baselines and benchmarks"""
