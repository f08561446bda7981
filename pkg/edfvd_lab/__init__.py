"""
edfvd_lab 包

该项目实现一个 IMC/EMC 混合关键性任务系统的 EDF-VD 工具箱：
- 基于利用率的充分可调度性测试（IMC 与 EMC 共用）
- 加速因子函数及其数值性质验证
- 低关键性任务降级服务的质量优化（预算优化 + 逐个丢弃）
- 离散事件仿真器与轨迹检查器，用于经验性地验证分析结论
- 随机任务集生成与接受率扫描实验（CSV 输出）
"""

__all__ = ["__version__"]

__version__ = "0.1.0"
