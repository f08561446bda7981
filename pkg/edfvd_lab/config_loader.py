"""
配置加载模块（YAML + 环境变量）。

设计目标：
1. 生成器默认参数、仿真视野策略、扫描实验的桌面级默认值都放在独立 YAML 文件中，运行时动态加载；
2. 默认配置路径为仓库根目录下的 config/，可用环境变量 EDFVD_LAB_CONFIG_DIR 覆盖；
3. 优先级：命令行参数 > 环境变量 > YAML > 代码内置默认值。
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml


def _repo_root() -> Path:
    """
    推断仓库根目录。

    约定：edfvd_lab/ 与 config/ 同级放置在仓库根目录下。
    """

    here = Path(__file__).resolve()
    return here.parent.parent


def load_env() -> None:
    """
    加载本地环境变量（优先读取项目根目录 .env）。

    说明：.env 只用于覆盖 EDFVD_LAB_* 开关，不应提交到仓库。
    """

    try:
        from dotenv import load_dotenv  # type: ignore
    except ModuleNotFoundError as e:
        raise RuntimeError("缺少依赖 python-dotenv。请先安装项目依赖后再运行。") from e

    load_dotenv(override=False)


@dataclass(frozen=True)
class ConfigPaths:
    """
    配置文件路径集合。
    """

    root: Path

    @property
    def config_dir(self) -> Path:
        override = os.getenv("EDFVD_LAB_CONFIG_DIR", "").strip()
        if override:
            return Path(override)
        return self.root / "config"

    @property
    def generator(self) -> Path:
        return self.config_dir / "generator.yaml"

    @property
    def simulation(self) -> Path:
        return self.config_dir / "simulation.yaml"

    @property
    def sweep(self) -> Path:
        return self.config_dir / "sweep.yaml"

    @property
    def sweeps_dir(self) -> Path:
        return self.config_dir / "sweeps"

    def sweep_file(self, name: str) -> Path:
        """
        获取预置扫描配置（不含扩展名，例如 lambda_impact）。
        """

        return self.sweeps_dir / f"{name}.json"


def default_paths() -> ConfigPaths:
    return ConfigPaths(root=_repo_root())


def load_yaml(path: Path) -> dict[str, Any]:
    """
    读取单个 YAML 配置文件。

    空文件视为空映射；文件缺失时直接抛出 FileNotFoundError（是否退回内置默认值由调用方决定）。
    """

    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path}：配置文件顶层应为映射，实际为 {type(data).__name__}")
    return data


def _load_optional(path: Path) -> dict[str, Any]:
    # 配置目录被裁剪时退回代码内置默认值
    if not path.exists():
        return {}
    return load_yaml(path)


def load_generator_defaults(paths: ConfigPaths | None = None) -> dict[str, Any]:
    """
    加载任务生成默认参数（周期范围、利用率范围、R 范围、容差、重试上限等）。
    """

    p = paths or default_paths()
    return (_load_optional(p.generator).get("generator") or {})


def load_simulation_defaults(paths: ConfigPaths | None = None) -> dict[str, Any]:
    """
    加载仿真默认参数（视野倍数）。每个任务集的场景数属于扫描配置，见 sweep.yaml。
    """

    p = paths or default_paths()
    return (_load_optional(p.simulation).get("simulation") or {})


def load_sweep_defaults(paths: ConfigPaths | None = None) -> dict[str, Any]:
    """
    加载扫描实验默认参数，并应用 EDFVD_LAB_THREADS 环境变量覆盖。
    """

    p = paths or default_paths()
    cfg = dict(_load_optional(p.sweep).get("sweep") or {})
    env_threads = os.getenv("EDFVD_LAB_THREADS", "").strip()
    if env_threads:
        try:
            cfg["threads"] = int(env_threads)
        except ValueError:
            pass
    return cfg


def debug_enabled() -> bool:
    return os.getenv("EDFVD_LAB_DEBUG", "").strip() in {"1", "true", "True"}
