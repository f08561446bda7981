"""
文件格式解析子包。
"""
