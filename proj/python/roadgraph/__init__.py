from ._core import (
    ConfigError,
    DomainError,
    LayoutError,
    ParseError,
    ValidationError,
    apls,
    count_special_components,
    coupled_nms,
    detect_keypoints,
    euclidean_graph,
    extract,
    gap_bound,
    line_graph,
    plan_windows,
    synth_scene,
    topo,
    whitney_check,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "LayoutError",
    "ParseError",
    "ValidationError",
    "apls",
    "count_special_components",
    "coupled_nms",
    "detect_keypoints",
    "euclidean_graph",
    "extract",
    "gap_bound",
    "line_graph",
    "plan_windows",
    "synth_scene",
    "topo",
    "whitney_check",
]
