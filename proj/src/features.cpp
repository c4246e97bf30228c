// Copyright 2026 the wknet authors
// Licensed under the Apache License, Version 2.0

#include "wknet/features.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "wknet/errors.hpp"

namespace wknet {

namespace {

constexpr double kPi = 3.14159265358979323846;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 complex FFT (power-of-two sizes only; fft_size is
// validated at config time).
void fft_radix2(std::vector<float>& re, std::vector<float>& im) {
    const std::size_t n = re.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const float wr = static_cast<float>(std::cos(ang));
        const float wi = static_cast<float>(std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            float cur_r = 1.0f, cur_i = 0.0f;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::size_t a = i + k;
                const std::size_t b = i + k + len / 2;
                const float vr = re[b] * cur_r - im[b] * cur_i;
                const float vi = re[b] * cur_i + im[b] * cur_r;
                re[b] = re[a] - vr;
                im[b] = im[a] - vi;
                re[a] += vr;
                im[a] += vi;
                const float nr = cur_r * wr - cur_i * wi;
                cur_i = cur_r * wi + cur_i * wr;
                cur_r = nr;
            }
        }
    }
}

}  // namespace

int FeatureConfig::window_samples(int sample_rate) const {
    return static_cast<int>(std::lround(static_cast<double>(window_ms) * sample_rate / 1000.0));
}

int FeatureConfig::hop_samples(int sample_rate) const {
    return static_cast<int>(std::lround(static_cast<double>(hop_ms) * sample_rate / 1000.0));
}

void FeatureConfig::validate(int sample_rate) const {
    if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
    if (num_mels <= 0) throw ConfigError("num_mels must be positive");
    if (window_ms < hop_ms) throw ConfigError("window_ms must be >= hop_ms");
    if (!is_power_of_two(fft_size)) throw ConfigError("fft_size must be a power of two");
    if (fft_size < window_samples(sample_rate))
        throw ConfigError("fft_size smaller than the analysis window (" +
                          std::to_string(window_samples(sample_rate)) + " samples)");
    if (!(mel_low_hz < mel_high_hz))
        throw ConfigError("mel_low_hz must be below mel_high_hz");
    if (mel_high_hz > static_cast<float>(sample_rate) / 2.0f)
        throw ConfigError("mel_high_hz above Nyquist");
    if (log_floor <= 0.0f) throw ConfigError("log_floor must be positive");
}

Matrix build_mel_filterbank(const FeatureConfig& config, int sample_rate) {
    config.validate(sample_rate);
    const int bins = config.fft_size / 2 + 1;
    Matrix fb(config.num_mels, bins);

    const double mel_lo = hz_to_mel(config.mel_low_hz);
    const double mel_hi = hz_to_mel(config.mel_high_hz);
    std::vector<double> edges_hz(config.num_mels + 2);
    for (int i = 0; i < config.num_mels + 2; ++i) {
        const double mel = mel_lo + (mel_hi - mel_lo) * i / (config.num_mels + 1);
        edges_hz[i] = mel_to_hz(mel);
    }

    const double bin_hz = static_cast<double>(sample_rate) / config.fft_size;
    for (int m = 0; m < config.num_mels; ++m) {
        const double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
        double sum = 0.0;
        for (int k = 0; k < bins; ++k) {
            const double f = k * bin_hz;
            double wgt = 0.0;
            if (f > lo && f < mid) {
                wgt = (f - lo) / (mid - lo);
            } else if (f >= mid && f < hi) {
                wgt = (hi - f) / (hi - mid);
            }
            fb(m, k) = static_cast<float>(wgt);
            sum += wgt;
        }
        if (sum <= 0.0)
            throw ConfigError("mel filter " + std::to_string(m) +
                              " covers no FFT bin; fewer mels or a larger fft_size needed");
    }
    return fb;
}

std::vector<std::pair<float, float>> mel_band_edges(const FeatureConfig& config,
                                                    int sample_rate) {
    const double mel_lo = hz_to_mel(config.mel_low_hz);
    const double mel_hi = hz_to_mel(config.mel_high_hz);
    std::vector<std::pair<float, float>> bands(config.num_mels);
    for (int m = 0; m < config.num_mels; ++m) {
        const double lo = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (config.num_mels + 1));
        const double hi = mel_to_hz(mel_lo + (mel_hi - mel_lo) * (m + 2) / (config.num_mels + 1));
        bands[m] = {static_cast<float>(lo), static_cast<float>(hi)};
    }
    (void)sample_rate;
    return bands;
}

FeatureExtractor::FeatureExtractor(const FeatureConfig& config, int sample_rate)
    : config_(config), sample_rate_(sample_rate),
      filterbank_(build_mel_filterbank(config, sample_rate)) {
    const int win = config_.window_samples(sample_rate_);
    window_.resize(win);
    for (int n = 0; n < win; ++n) {
        window_[n] = static_cast<float>(0.54 - 0.46 * std::cos(2.0 * kPi * n / (win - 1)));
    }
    const int bins = config_.fft_size / 2 + 1;
    filter_bins_.resize(config_.num_mels);
    for (int m = 0; m < config_.num_mels; ++m) {
        int first = bins, last = -1;
        for (int k = 0; k < bins; ++k) {
            if (filterbank_(m, k) > 0.0f) {
                if (k < first) first = k;
                last = k;
            }
        }
        filter_bins_[m] = {first, last};
    }
}

FeatureSequence FeatureExtractor::extract(const AudioBuffer& audio) const {
    if (audio.sample_rate != sample_rate_)
        throw DataError("audio sample rate " + std::to_string(audio.sample_rate) +
                        " does not match the extractor rate " + std::to_string(sample_rate_));

    const int win = config_.window_samples(sample_rate_);
    const int hop = config_.hop_samples(sample_rate_);
    const int n = static_cast<int>(audio.samples.size());
    const int t_n = n >= win ? (n - win) / hop + 1 : 0;

    FeatureSequence out;
    out.hop_ms = config_.hop_ms;
    out.frames = Matrix(t_n, config_.num_mels);
    if (t_n == 0) return out;

    const int bins = config_.fft_size / 2 + 1;

#pragma omp parallel for schedule(static) if (t_n >= 8)
    for (int t = 0; t < t_n; ++t) {
        std::vector<float> re(config_.fft_size, 0.0f);
        std::vector<float> im(config_.fft_size, 0.0f);
        const float* src = audio.samples.data() + static_cast<std::size_t>(t) * hop;

        // Per-frame pre-emphasis keeps every frame a pure function of its
        // own window, which makes the hop-shift invariance exact.
        re[0] = (src[0] - config_.preemphasis * src[0]) * window_[0];
        for (int i = 1; i < win; ++i) {
            re[i] = (src[i] - config_.preemphasis * src[i - 1]) * window_[i];
        }

        fft_radix2(re, im);

        std::vector<float> power(bins);
        for (int k = 0; k < bins; ++k) power[k] = re[k] * re[k] + im[k] * im[k];

        float* frame = out.frames.row(t);
        for (int m = 0; m < config_.num_mels; ++m) {
            const auto [first, last] = filter_bins_[m];
            const float* fb = filterbank_.row(m);
            float acc = 0.0f;
            for (int k = first; k <= last; ++k) acc += fb[k] * power[k];
            frame[m] = std::log(acc + config_.log_floor);
        }
    }
    return out;
}

FeatureSequence compute_lfbe(const AudioBuffer& audio, const FeatureConfig& config) {
    return FeatureExtractor(config, audio.sample_rate).extract(audio);
}

void write_features_csv(const FeatureSequence& features, std::ostream& out) {
    char buf[32];
    for (int t = 0; t < features.num_frames(); ++t) {
        const float* row = features.frames.row(t);
        for (int m = 0; m < features.dim(); ++m) {
            std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(row[m]));
            if (m > 0) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace wknet
