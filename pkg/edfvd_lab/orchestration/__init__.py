"""
实验编排子包。
"""
