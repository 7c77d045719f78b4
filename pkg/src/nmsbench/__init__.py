"""Graph-based NMS: exact and approximate fast suppression with a benchmark harness."""

from nmsbench.detections import Detection, DetectionSet, GroundTruthBox, priority_order
from nmsbench.geometry import BoundingBox, Point, Preorder
from nmsbench.graph import SuppressionGraph, build_graph, topo_dp, wcc
from nmsbench.nms import METHODS, InstrumentedMask, NmsConfig, QsiTree, cartesian_tree, run_method

__all__ = [
    "METHODS",
    "BoundingBox",
    "Detection",
    "DetectionSet",
    "GroundTruthBox",
    "InstrumentedMask",
    "NmsConfig",
    "Point",
    "Preorder",
    "QsiTree",
    "SuppressionGraph",
    "build_graph",
    "cartesian_tree",
    "priority_order",
    "run_method",
    "topo_dp",
    "wcc",
]
