// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include <doctest.h>
#include <omp.h>

#include "reference.hpp"
#include "test_util.hpp"
#include "wknet/kernels.hpp"

using namespace wknet;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.uniform(-1.0f, 1.0f);
    return m;
}

kernels::ConvWeights random_conv(int s, int ci, int co, std::uint64_t seed) {
    Rng rng(seed);
    kernels::ConvWeights w(s, ci, co);
    for (auto& v : w.w) v = rng.uniform(-0.5f, 0.5f);
    for (auto& v : w.b) v = rng.uniform(-0.1f, 0.1f);
    return w;
}

kernels::DenseWeights random_dense(int ci, int co, std::uint64_t seed) {
    Rng rng(seed);
    kernels::DenseWeights w(ci, co);
    for (auto& v : w.w) v = rng.uniform(-0.5f, 0.5f);
    for (auto& v : w.b) v = rng.uniform(-0.1f, 0.1f);
    return w;
}

}  // namespace

TEST_CASE("identity 1x1 conv reproduces its input") {
    kernels::ConvWeights w(1, 3, 3);
    w.at(0, 0, 0) = w.at(0, 1, 1) = w.at(0, 2, 2) = 1.0f;
    const Matrix x = random_matrix(10, 3, 7);
    Matrix out(10, 3);
    kernels::causal_conv_forward(x, w, 1, out);
    for (std::size_t i = 0; i < x.data.size(); ++i) CHECK(out.data[i] == x.data[i]);
}

TEST_CASE("two-tap sum kernel adds the previous frame, zero left pad") {
    kernels::ConvWeights w(2, 1, 1);
    w.at(0, 0, 0) = 1.0f;
    w.at(1, 0, 0) = 1.0f;
    Matrix x(5, 1);
    for (int t = 0; t < 5; ++t) x(t, 0) = static_cast<float>(t + 1);
    Matrix out(5, 1);
    kernels::causal_conv_forward(x, w, 1, out);
    CHECK(out(0, 0) == 1.0f);  // x[-1] reads as zero
    for (int t = 1; t < 5; ++t) CHECK(out(t, 0) == x(t, 0) + x(t - 1, 0));
}

TEST_CASE("dilated conv matches the naive reference") {
    const Matrix x = random_matrix(10, 3, 11);
    const auto w = random_conv(3, 3, 5, 12);
    Matrix out(10, 5);
    kernels::causal_conv_forward(x, w, 4, out);
    const auto expect = ref::conv_naive(ref::to_mat(x), w, 4);
    for (int t = 0; t < 10; ++t) {
        for (int c = 0; c < 5; ++c) {
            CHECK(testutil::rel_close(out(t, c), expect[t][c], 1e-6, 1e-7));
        }
    }
}

TEST_CASE("dense layer matches the naive reference") {
    const Matrix x = random_matrix(17, 6, 21);
    const auto w = random_dense(6, 4, 22);
    Matrix out(17, 4);
    kernels::dense_forward(x, w, out);
    const auto expect = ref::dense_naive(ref::to_mat(x), w);
    for (int t = 0; t < 17; ++t) {
        for (int c = 0; c < 4; ++c) {
            CHECK(testutil::rel_close(out(t, c), expect[t][c], 1e-6, 1e-7));
        }
    }
}

TEST_CASE("kernel results are bitwise identical across thread counts") {
    const Matrix x = random_matrix(300, 8, 31);
    const auto w = random_conv(3, 8, 8, 32);
    const int saved = omp_get_max_threads();

    omp_set_num_threads(1);
    Matrix serial(300, 8);
    kernels::causal_conv_forward(x, w, 2, serial);

    omp_set_num_threads(4);
    Matrix parallel(300, 8);
    kernels::causal_conv_forward(x, w, 2, parallel);
    omp_set_num_threads(saved);

    for (std::size_t i = 0; i < serial.data.size(); ++i) {
        CHECK(serial.data[i] == parallel.data[i]);
    }
}

TEST_CASE("conv backward matches central finite differences of the reference") {
    const int t_n = 8, ci = 3, co = 4, dilation = 2;
    const Matrix x = random_matrix(t_n, ci, 41);
    auto w = random_conv(3, ci, co, 42);
    const Matrix dout = random_matrix(t_n, co, 43);

    kernels::ConvWeights grad(3, ci, co);
    Matrix dx(t_n, ci);
    kernels::conv_backward(x, dout, w, dilation, grad, &dx);

    // Scalar objective sum(out .* dout); its weight gradient is checked
    // against finite differences of the naive reference.
    const auto objective = [&](const kernels::ConvWeights& wt) {
        const auto out = ref::conv_naive(ref::to_mat(x), wt, dilation);
        double s = 0.0;
        for (int t = 0; t < t_n; ++t) {
            for (int c = 0; c < co; ++c) s += out[t][c] * dout(t, c);
        }
        return s;
    };
    const float h = 1e-3f;
    for (std::size_t j = 0; j < w.w.size(); j += 7) {
        auto wp = w, wm = w;
        wp.w[j] += h;
        wm.w[j] -= h;
        const double fd = (objective(wp) - objective(wm)) /
                          (static_cast<double>(wp.w[j]) - static_cast<double>(wm.w[j]));
        CHECK(testutil::rel_close(grad.w[j], fd, 1e-4, 1e-6));
    }

    // Input gradient the same way.
    const auto objective_x = [&](const Matrix& xv) {
        const auto out = ref::conv_naive(ref::to_mat(xv), w, dilation);
        double s = 0.0;
        for (int t = 0; t < t_n; ++t) {
            for (int c = 0; c < co; ++c) s += out[t][c] * dout(t, c);
        }
        return s;
    };
    for (std::size_t j = 0; j < x.data.size(); j += 5) {
        Matrix xp = x, xm = x;
        xp.data[j] += h;
        xm.data[j] -= h;
        const double fd = (objective_x(xp) - objective_x(xm)) /
                          (static_cast<double>(xp.data[j]) - static_cast<double>(xm.data[j]));
        CHECK(testutil::rel_close(dx.data[j], fd, 1e-4, 1e-6));
    }
}

TEST_CASE("multiply counter reports the analytic kernel cost") {
    const Matrix x = random_matrix(50, 4, 51);
    const auto w = random_conv(3, 4, 6, 52);
    kernels::reset_multiply_count();
    Matrix out(50, 6);
    kernels::causal_conv_forward(x, w, 2, out);
    CHECK(kernels::multiply_count() == 50ull * 3 * 4 * 6);

    const auto d = random_dense(6, 2, 53);
    kernels::reset_multiply_count();
    Matrix out2(50, 2);
    kernels::dense_forward(out, d, out2);
    CHECK(kernels::multiply_count() == 50ull * 6 * 2);
}
