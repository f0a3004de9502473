"""Explorer components"""
