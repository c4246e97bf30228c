// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0
//
// Serial double-precision reference implementation: straight nested loops,
// no caching, no parallelism. Kept for testing (forward equivalence, the
// finite-difference gradient oracle) and as the comparison side of the
// kernel benchmark. Deliberately independent of the production kernels --
// do not "optimize" this by calling into wknet::kernels.

#pragma once

#include <vector>

#include "wknet/labeling.hpp"
#include "wknet/network.hpp"

namespace wknet::ref {

using Mat = std::vector<std::vector<double>>;

Mat conv_naive(const Mat& x, const kernels::ConvWeights& w, int dilation);
Mat dense_naive(const Mat& x, const kernels::DenseWeights& w);

// Whole-network forward on raw features; returns T x 2 probabilities.
Mat forward(const FeatureSequence& features, const ModelParams& params,
            const Architecture& arch, const FeatureNorm& norm);

// Masked weighted cross-entropy of the reference forward.
double masked_loss(const FeatureSequence& features, const LabelSequence& labels,
                   const ModelParams& params, const Architecture& arch,
                   const FeatureNorm& norm, double pos_weight = 1.0);

Mat to_mat(const Matrix& m);

}  // namespace wknet::ref
