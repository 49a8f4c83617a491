#!/usr/bin/env python3
# Copyright 2026 The PopSweeper Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes two tiny untrained ONNX graphs that follow the engine's model contract.

    classifier.onnx  float32[1,3,224,224] -> float32[1,1]  (post-sigmoid)
    detector.onnx    float32[1,3,640,640] -> float32[2,6]  (x1,y1,x2,y2,conf,class)

They stand in for exported production models in the test-suite.
Usage: make_test_models.py OUTPUT_DIR
"""

import pathlib
import sys

import numpy as np
import onnx
from onnx import TensorProto, helper, numpy_helper


def _init(name, array):
    return numpy_helper.from_array(np.asarray(array, dtype=np.float32), name)


def classifier(rng):
    nodes = [
        helper.make_node("Conv", ["input", "conv_w", "conv_b"], ["c1"], kernel_shape=[4, 4], strides=[4, 4]),
        helper.make_node("Relu", ["c1"], ["r1"]),
        helper.make_node("GlobalAveragePool", ["r1"], ["gap"]),
        helper.make_node("Flatten", ["gap"], ["flat"], axis=1),
        helper.make_node("Gemm", ["flat", "fc1_w", "fc1_b"], ["h1"], transB=1),
        helper.make_node("Relu", ["h1"], ["h1r"]),
        helper.make_node("Gemm", ["h1r", "fc2_w", "fc2_b"], ["logit"], transB=1),
        helper.make_node("Sigmoid", ["logit"], ["probability"]),
    ]
    inits = [
        _init("conv_w", rng.normal(0, 0.2, (4, 3, 4, 4))),
        _init("conv_b", rng.normal(0, 0.1, (4,))),
        _init("fc1_w", rng.normal(0, 0.5, (8, 4))),
        _init("fc1_b", rng.normal(0, 0.1, (8,))),
        _init("fc2_w", rng.normal(0, 0.5, (1, 8))),
        _init("fc2_b", rng.normal(0, 0.1, (1,))),
    ]
    graph = helper.make_graph(
        nodes, "popup_classifier",
        [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, 224, 224])],
        [helper.make_tensor_value_info("probability", TensorProto.FLOAT, [1, 1])],
        inits)
    return graph


def detector(rng):
    nodes = [
        helper.make_node("Conv", ["input", "conv_w", "conv_b"], ["c1"], kernel_shape=[8, 8], strides=[8, 8]),
        helper.make_node("Relu", ["c1"], ["r1"]),
        helper.make_node("GlobalAveragePool", ["r1"], ["gap"]),
        helper.make_node("Flatten", ["gap"], ["flat"], axis=1),
        helper.make_node("Gemm", ["flat", "fc_w", "fc_b"], ["raw"], transB=1),
        helper.make_node("Sigmoid", ["raw"], ["unit"]),
        helper.make_node("Reshape", ["unit", "rows_shape"], ["rows"]),
        helper.make_node("Mul", ["rows", "row_scale"], ["detections"]),
    ]
    inits = [
        _init("conv_w", rng.normal(0, 0.2, (4, 3, 8, 8))),
        _init("conv_b", rng.normal(0, 0.1, (4,))),
        _init("fc_w", rng.normal(0, 0.5, (12, 4))),
        _init("fc_b", rng.normal(0, 0.1, (12,))),
        numpy_helper.from_array(np.array([2, 6], dtype=np.int64), "rows_shape"),
        _init("row_scale", [[640, 640, 640, 640, 1, 0]]),
    ]
    graph = helper.make_graph(
        nodes, "close_button_detector",
        [helper.make_tensor_value_info("input", TensorProto.FLOAT, [1, 3, 640, 640])],
        [helper.make_tensor_value_info("detections", TensorProto.FLOAT, [2, 6])],
        inits)
    return graph


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else ".")
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240917)
    for name, build in (("classifier.onnx", classifier), ("detector.onnx", detector)):
        model = helper.make_model(build(rng), opset_imports=[helper.make_opsetid("", 11)])
        model.ir_version = 6
        onnx.checker.check_model(model)
        onnx.save(model, str(out / name))
        print("wrote", out / name)


if __name__ == "__main__":
    main()
