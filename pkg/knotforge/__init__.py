"""KnotForge: compact rational knot parameterizations"""
