"""
参考参数与附录给定数值

配置说明：
- APPENDIX_PARAMS 为附录示例的参数组，reproduce-appendix 默认使用
- STATED_VALUES 为附录给出、需要与计算结果对照的数值
- 修改后重新运行即生效
"""

# 附录示例参数（a<0，散焦介质）
APPENDIX_PARAMS = {
    "a": -1.0,
    "c1": -2.0,
    "c2": 0.4,
    "c3": 0.13,
    "h0": 0.0,
    "f0": 0.0,
    "phi0": 0.0,
}

# 附录给出的数值
STATED_VALUES = {
    "Lz": 2.85,            # h(z) 的周期
    "Lz_rel_tol": 0.02,    # 对照容差（相对）
    "h0_range": (0.0, 0.08),  # 相图给出的 h0 取值范围
    "f0_rows": (0.0, 0.8),   # 可行区域对照的两个初值
    "r1_coefficients": (-16.0, 8.0, -1.6, 0.26, 0.0),
    "Lt_varies_with_z": True,  # 附录曲线中 Lt 随 z 变化
}

# 各图默认窗口（以周期为单位）
FIGURE_WINDOWS = {
    "z_periods": 3.0,        # z 方向 3 个 Lz
    "t_periods": 2.0,        # t 方向 2 个 Lt
    "f0_range": (0.0, 1.0),  # 区域图 f0 窗口
}

# 测试用格点参数（Weierstrass 函数）
FIXTURE_LATTICES = {
    "lemniscatic_unit": {"g2": 1.0, "g3": 0.0, "omega": 1.854074677301372},
    "lemniscatic_four": {"g2": 4.0, "g3": 0.0, "omega": 1.311028777146060},
    "degenerate_sinh": {"g2": 12.0, "g3": -8.0},
}
