"""Explorer pages"""
