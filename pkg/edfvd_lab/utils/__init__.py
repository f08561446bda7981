"""
工具子包。
"""
