from typing import Any, Dict, List, Sequence, Tuple

from storage.artifact_store import format_value


class ReportFormatter:
    """报告格式化工具"""

    @staticmethod
    def format_residual_report(report) -> List[str]:
        """
        格式化单个残差报告

        Args:
            report: ResidualReport

        Returns:
            文本行列表
        """
        lines = [f"【残差 {report.equation}】"]
        lines.append(f"最大绝对残差：{report.max_abs:.6e}")
        lines.append(f"最大相对残差：{report.max_rel:.6e}")
        if report.location is not None:
            where = ", ".join(f"{x:.6g}" for x in report.location)
            lines.append(f"最大值位置：({where})")
        lines.append(f"数值误差下限：{report.construction_error_floor:.3e}")
        if report.skipped:
            lines.append(f"跳过格点：{report.skipped}")
        if not report.evaluated:
            lines.append("未计算：所有格点均被跳过")
        for key, value in sorted(report.extra.items()):
            lines.append(f"{key}：{format_value(value)}")
        for name, part in report.parts.items():
            lines.append(f"  {name} 部分：max_rel={part.max_rel:.6e} max_abs={part.max_abs:.6e}")
        lines.append("")
        return lines

    @staticmethod
    def format_checks(checks: Sequence[Tuple[str, bool, str]]) -> List[str]:
        """格式化检查项（名称、是否通过、说明）"""
        lines = ["【检查项】"]
        for name, ok, detail in checks:
            mark = "通过" if ok else "未通过"
            lines.append(f"[{mark}] {name}：{detail}")
        lines.append("")
        return lines

    @staticmethod
    def format_report(
        title: str,
        sections: Dict[str, List[Tuple[str, Any]]],
        checks: Sequence[Tuple[str, bool, str]] = (),
        discrepancies: Sequence[str] = (),
        residuals: Sequence[Any] = (),
    ) -> str:
        """
        格式化命令报告

        Args:
            title: 标题
            sections: 分节的 (键, 值) 列表
            checks: 检查项
            discrepancies: 与给定数值的差异说明
            residuals: 残差报告列表

        Returns:
            格式化后的文本
        """
        lines = ["=" * 30, title, "=" * 30, ""]

        for heading, rows in sections.items():
            if not rows:
                continue
            lines.append(f"【{heading}】")
            for key, value in rows:
                lines.append(f"{key}：{format_value(value)}")
            lines.append("")

        for report in residuals:
            lines.extend(ReportFormatter.format_residual_report(report))

        if checks:
            lines.extend(ReportFormatter.format_checks(checks))

        lines.append("【与给定数值的差异】")
        if discrepancies:
            for i, item in enumerate(discrepancies, 1):
                lines.append(f"{i}. {item}")
        else:
            lines.append("无")
        lines.append("")
        lines.append("=" * 30)
        return "\n".join(lines)
