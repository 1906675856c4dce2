import json
import re
from typing import Any, Dict, List

from core.exceptions import InvalidInputError

_KEY = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")


def parse_value(text: str) -> Any:
    """
    将命令行字符串转换为数值/布尔/列表，无法解析时保留原字符串

    Args:
        text: 输入字符串，如 "-1", "0.4", "true", "[0, 0.8]"

    Returns:
        转换后的值
    """
    text = text.strip()
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return json.loads(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_overrides(items: List[str]) -> Dict[str, Any]:
    """
    解析 --param key=value 列表，后出现的键覆盖先出现的

    Raises:
        InvalidInputError: 缺少 "=" 或键名非法
    """
    result: Dict[str, Any] = {}
    for item in items:
        if "=" not in item:
            raise InvalidInputError("override must look like key=value", {"override": item})
        key, value = item.split("=", 1)
        key = key.strip()
        if not _KEY.match(key):
            raise InvalidInputError("invalid override key", {"key": key})
        result[key] = parse_value(value)
    return result


def set_dotted(data: Dict[str, Any], key: str, value: Any):
    """按 "a.b.c" 路径写入嵌套字典"""
    parts = key.split(".")
    current = data
    for part in parts[:-1]:
        if not isinstance(current.get(part), dict):
            current[part] = {}
        current = current[part]
    current[parts[-1]] = value
