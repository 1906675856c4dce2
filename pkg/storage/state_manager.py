import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

logger = logging.getLogger(__name__)


class RunManifest:
    """运行清单：记录产物版本、参数、最近一次命令与各命令产物，持久化到 manifest.json"""

    def __init__(self, manifest_file: Union[str, Path]):
        self.manifest_file = Path(manifest_file)
        self.state = self._load()

    def _load(self) -> Dict:
        """加载清单文件（损坏或不存在时从空清单开始）"""
        if self.manifest_file.exists():
            try:
                data = json.loads(self.manifest_file.read_text(encoding="utf-8"))
                if isinstance(data, dict):
                    return data
            except (OSError, ValueError) as e:
                logger.warning("Failed to load manifest %s: %s", self.manifest_file, e)
        return {}

    def _save(self):
        """保存清单（键排序，保证同样的运行得到同样的文件）"""
        try:
            text = json.dumps(self.state, ensure_ascii=False, indent=2, sort_keys=True)
            self.manifest_file.write_text(text + "\n", encoding="utf-8")
        except OSError as e:
            logger.error("Failed to save manifest %s: %s", self.manifest_file, e)

    @property
    def command(self) -> Optional[str]:
        return self.state.get("command")

    def record_run(self, version: str, params: Dict[str, str]):
        """登记产物版本与全部参数（已格式化为文本）"""
        self.state["artifact_version"] = version
        self.state["params"] = dict(params)
        self._save()

    def record_command(self, command: str):
        self.state["command"] = command
        self._save()

    def artifacts(self, command: str) -> List[str]:
        """某命令已登记的产物（相对输出目录的路径）"""
        groups = self.state.get("artifacts")
        if not isinstance(groups, dict):
            return []
        return list(groups.get(command) or [])

    def add_artifact(self, command: str, name: str):
        """登记产物文件（按命令分组，去重且保持顺序）"""
        groups = self.state.get("artifacts")
        if not isinstance(groups, dict):
            groups = self.state["artifacts"] = {}
        names = self.artifacts(command)
        if name not in names:
            names.append(name)
        groups[command] = names
        self._save()
