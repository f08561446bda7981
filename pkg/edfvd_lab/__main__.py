"""
允许通过 `python -m edfvd_lab ...` 运行 CLI。
"""

from edfvd_lab.cli import main


if __name__ == "__main__":
    main()
